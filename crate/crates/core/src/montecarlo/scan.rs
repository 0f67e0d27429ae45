use serde::{Deserialize, Serialize};

use super::ks::ks_normality;
use super::samples::simulate_counts;
use crate::band::{expected_marks, sigma_delta_sq};
use crate::error::{Error, Result};
use crate::events::RatePair;
use crate::generators::bernoulli;

/// Significance level a cell must clear (`p > level`) to count as normal.
pub const NORMALITY_LEVEL: f64 = 0.05;

/// How the lag of a scan cell is chosen at each horizon.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LagRule {
    Fixed(u64),
    /// `floor(sqrt(T))`.
    SqrtHorizon,
}

impl LagRule {
    pub fn at(&self, horizon: u64) -> u64 {
        match *self {
            LagRule::Fixed(d) => d,
            LagRule::SqrtHorizon => (horizon as f64).sqrt().floor() as u64,
        }
    }
}

impl std::fmt::Display for LagRule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LagRule::Fixed(d) => write!(f, "{d}"),
            LagRule::SqrtHorizon => f.write_str("sqrtT"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ScanConfig {
    /// Homogeneous rates `p_x = p_y`, each in `(0, 1)`.
    pub rates: Vec<f64>,
    pub lags: Vec<LagRule>,
    /// Strictly ascending.
    pub horizons: Vec<u64>,
    pub estimates_per_cell: usize,
    pub seed: u64,
    pub workers: usize,
}

/// KS outcome for one `(rate, lag, horizon)` cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanPoint {
    pub rate: f64,
    pub lag_rule: LagRule,
    pub horizon: u64,
    pub lag: u64,
    pub statistic: f64,
    pub p_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanCell {
    pub rate: f64,
    pub lag_rule: LagRule,
    /// First horizon with KS `p > 0.05`; `None` if never reached.
    pub onset: Option<u64>,
    pub at_onset: Option<ScanPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormalityScan {
    pub version: String,
    pub seed: u64,
    pub estimates_per_cell: usize,
    pub horizons: Vec<u64>,
    pub cells: Vec<ScanCell>,
    /// Every evaluated point, in evaluation order.
    pub trace: Vec<ScanPoint>,
}

impl NormalityScan {
    pub fn cell(&self, rate: f64, lag_rule: LagRule) -> Option<&ScanCell> {
        self.cells.iter().find(|c| c.rate == rate && c.lag_rule == lag_rule)
    }
}

/// For each `(rate, lag)` cell, walks the horizons in ascending order and
/// records the first one at which the standardized count passes a KS test
/// against `N(0, 1)`. Counts are standardized with the analytical mean and
/// `sigma_delta * sqrt(T)` at the true rate.
pub fn normality_scan(cfg: &ScanConfig) -> Result<NormalityScan> {
    if cfg.rates.is_empty() || cfg.lags.is_empty() || cfg.horizons.is_empty() {
        return Err(Error::domain("normality scan needs non-empty rate, lag and horizon grids"));
    }
    if cfg.estimates_per_cell < 100 {
        return Err(Error::domain(format!("need at least 100 estimates per cell, got {}", cfg.estimates_per_cell)));
    }
    if cfg.horizons.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::domain("horizons must be strictly ascending"));
    }
    if let Some(r) = cfg.rates.iter().find(|r| !(**r > 0.0 && **r < 1.0)) {
        return Err(Error::domain(format!("scan rate {r} must lie in (0, 1)")));
    }

    let mut cells = Vec::new();
    let mut trace = Vec::new();
    for (ri, &rate) in cfg.rates.iter().enumerate() {
        let rates = RatePair { p_x: rate, p_y: rate };
        let mut onset: Vec<Option<ScanPoint>> = vec![None; cfg.lags.len()];
        for (hi, &horizon) in cfg.horizons.iter().enumerate() {
            let pending: Vec<usize> = (0..cfg.lags.len()).filter(|&k| onset[k].is_none()).collect();
            if pending.is_empty() {
                break;
            }
            let mut lags: Vec<u64> = pending.iter().map(|&k| cfg.lags[k].at(horizon)).collect();
            lags.sort_unstable();
            lags.dedup();
            let stream = ((ri as u64) << 32) | hi as u64;
            let samples = simulate_counts(
                |rng| Ok((bernoulli(rate, horizon, rng)?, bernoulli(rate, horizon, rng)?)),
                &lags,
                cfg.estimates_per_cell,
                cfg.seed,
                stream,
                cfg.workers,
            )?;
            for &k in &pending {
                let rule = cfg.lags[k];
                let lag = rule.at(horizon);
                let col = lags.binary_search(&lag).expect("lag collected above");
                let centre = expected_marks(rates, horizon, lag);
                let sd = sigma_delta_sq(rates, lag).sqrt() * (horizon as f64).sqrt();
                let z: Vec<f64> = samples.column(col).iter().map(|c| (c - centre) / sd).collect();
                let ks = ks_normality(&z)?;
                let point =
                    ScanPoint { rate, lag_rule: rule, horizon, lag, statistic: ks.statistic, p_value: ks.p_value };
                trace.push(point);
                if ks.p_value > NORMALITY_LEVEL {
                    onset[k] = Some(point);
                }
            }
        }
        for (k, point) in onset.into_iter().enumerate() {
            cells.push(ScanCell { rate, lag_rule: cfg.lags[k], onset: point.map(|p| p.horizon), at_onset: point });
        }
    }
    Ok(NormalityScan {
        version: crate::VERSION.to_string(),
        seed: cfg.seed,
        estimates_per_cell: cfg.estimates_per_cell,
        horizons: cfg.horizons.clone(),
        cells,
        trace,
    })
}
