use serde::Serialize;

use super::samples::{simulate_counts, CountSamples};
use super::stats::{mean, nrmse, sample_std};
use crate::band::{expected_marks, sigma_delta_sq};
use crate::error::{Error, Result};
use crate::events::{EventSequence, RatePair};
use crate::generators::Model;
use crate::seeding::SimRng;

/// Rates the analytical curves are evaluated at.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum RateMode {
    /// Fixed, known per-bin probabilities.
    Nominal { p_x: f64, p_y: f64 },
    /// Per set, each channel's rate is its total event count over all pairs
    /// in the set divided by `pairs * T`.
    Pooled,
}

#[derive(Debug, Clone)]
pub struct AgreementConfig {
    pub lags: Vec<u64>,
    pub sets: usize,
    pub pairs_per_set: usize,
    pub seed: u64,
    pub workers: usize,
}

/// Empirical against analytical moments of the count at one lag.
///
/// NRMSE columns compare each set's estimate with that set's analytical
/// value and normalize by the mean absolute analytical value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LagAgreement {
    pub lag: u64,
    pub empirical_mean: f64,
    pub empirical_std: f64,
    pub se_mean: f64,
    pub analytical_mean: f64,
    /// `sigma_delta * sqrt(T)`.
    pub analytical_sd: f64,
    pub nrmse_mean: Option<f64>,
    pub nrmse_std: Option<f64>,
    /// Spread (sample std) of the per-set means; `None` with a single set.
    pub set_mean_spread: Option<f64>,
    /// Average of the per-set standard deviations.
    pub mean_set_std: f64,
    pub set_std_spread: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonteCarloReport {
    pub version: String,
    pub seed: u64,
    pub horizon: u64,
    pub sets: usize,
    pub pairs_per_set: usize,
    pub trials: usize,
    pub rate_mode: RateMode,
    /// Average realized rates over all trials.
    pub realized_rates: RatePair,
    pub nrmse_normalization: &'static str,
    pub lags: Vec<LagAgreement>,
}

impl MonteCarloReport {
    pub fn lag(&self, lag: u64) -> Option<&LagAgreement> {
        self.lags.iter().find(|l| l.lag == lag)
    }
}

fn check_config(cfg: &AgreementConfig) -> Result<()> {
    if cfg.sets < 1 || cfg.pairs_per_set < 2 {
        return Err(Error::domain(format!(
            "need at least 1 set of at least 2 pairs (got {} x {})",
            cfg.sets, cfg.pairs_per_set
        )));
    }
    Ok(())
}

/// Agreement between simulated and analytical moments for pairs drawn from
/// `sampler`.
pub fn estimate_agreement_with<F>(sampler: F, mode: RateMode, cfg: &AgreementConfig) -> Result<MonteCarloReport>
where
    F: Fn(&mut SimRng) -> Result<(EventSequence, EventSequence)> + Sync,
{
    check_config(cfg)?;
    let samples = simulate_counts(sampler, &cfg.lags, cfg.sets * cfg.pairs_per_set, cfg.seed, 0, cfg.workers)?;
    summarize_agreement(&samples, mode, cfg.sets)
}

/// Agreement for two independent single-channel models, with analytical
/// curves at the models' nominal rates.
pub fn estimate_agreement(x: &Model, y: &Model, cfg: &AgreementConfig) -> Result<MonteCarloReport> {
    let (Some(p_x), Some(p_y)) = (x.nominal_rate(), y.nominal_rate()) else {
        return Err(Error::domain(
            "estimate_agreement takes single-channel models; use estimate_agreement_with for joint models",
        ));
    };
    let rates = RatePair::new(p_x, p_y)?;
    estimate_agreement_with(
        |rng| {
            let (mut a, _) = x.sample(rng)?;
            let (mut b, _) = y.sample(rng)?;
            Ok((a.remove(0), b.remove(0)))
        },
        RateMode::Nominal { p_x: rates.p_x, p_y: rates.p_y },
        cfg,
    )
}

/// Splits `samples` into `sets` consecutive equal blocks and compares each
/// block's moments with the analytical values.
pub fn summarize_agreement(samples: &CountSamples, mode: RateMode, sets: usize) -> Result<MonteCarloReport> {
    let trials = samples.pairs.len();
    if sets == 0 || !trials.is_multiple_of(sets) || trials / sets < 2 {
        return Err(Error::domain(format!("{trials} trials cannot form {sets} sets of at least 2 pairs")));
    }
    let per_set = trials / sets;
    let t = samples.horizon;
    let tf = t as f64;

    let set_rates: Vec<RatePair> = (0..sets)
        .map(|s| {
            let block = &samples.pairs[s * per_set..(s + 1) * per_set];
            match mode {
                RateMode::Nominal { p_x, p_y } => RatePair { p_x, p_y },
                RateMode::Pooled => {
                    let nx: u64 = block.iter().map(|p| p.n_x).sum();
                    let ny: u64 = block.iter().map(|p| p.n_y).sum();
                    let denom = per_set as f64 * tf;
                    RatePair { p_x: nx as f64 / denom, p_y: ny as f64 / denom }
                }
            }
        })
        .collect();

    let mut lags = Vec::with_capacity(samples.lags.len());
    for (k, &lag) in samples.lags.iter().enumerate() {
        let column = samples.column(k);
        let mut set_means = Vec::with_capacity(sets);
        let mut set_stds = Vec::with_capacity(sets);
        let mut set_ana_mean = Vec::with_capacity(sets);
        let mut set_ana_sd = Vec::with_capacity(sets);
        for (s, rates) in set_rates.iter().enumerate() {
            let block = &column[s * per_set..(s + 1) * per_set];
            set_means.push(mean(block));
            set_stds.push(sample_std(block).expect("at least two pairs per set"));
            set_ana_mean.push(expected_marks(*rates, t, lag));
            set_ana_sd.push(sigma_delta_sq(*rates, lag).sqrt() * tf.sqrt());
        }
        let empirical_std = sample_std(&column).expect("at least two trials");
        lags.push(LagAgreement {
            lag,
            empirical_mean: mean(&column),
            empirical_std,
            se_mean: empirical_std / (trials as f64).sqrt(),
            analytical_mean: mean(&set_ana_mean),
            analytical_sd: mean(&set_ana_sd),
            nrmse_mean: nrmse(&set_means, &set_ana_mean)?,
            nrmse_std: nrmse(&set_stds, &set_ana_sd)?,
            set_mean_spread: sample_std(&set_means),
            mean_set_std: mean(&set_stds),
            set_std_spread: sample_std(&set_stds),
        });
    }

    let denom = trials as f64 * tf;
    let realized_rates = RatePair {
        p_x: samples.pairs.iter().map(|p| p.n_x).sum::<u64>() as f64 / denom,
        p_y: samples.pairs.iter().map(|p| p.n_y).sum::<u64>() as f64 / denom,
    };
    Ok(MonteCarloReport {
        version: crate::VERSION.to_string(),
        seed: samples.seed,
        horizon: t,
        sets,
        pairs_per_set: per_set,
        trials,
        rate_mode: mode,
        realized_rates,
        nrmse_normalization: "mean absolute analytical value",
        lags,
    })
}
