use serde::Serialize;

use super::samples::CountSamples;
use super::stats::{mean, sample_std};
use crate::band::{count_profile, BandStatistic};
use crate::error::{Error, Result};
use crate::events::{EventSequence, RatePair};

/// Z-scores of one pair over an ascending lag grid, with first differences.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LagProfile {
    pub horizon: u64,
    pub n_x: u64,
    pub n_y: u64,
    pub lags: Vec<u64>,
    pub stats: Vec<BandStatistic>,
    pub z: Vec<Option<f64>>,
    /// `dz[k] = z[k + 1] - z[k]`; undefined where either side is.
    pub dz: Vec<Option<f64>>,
}

/// First differences of a series with undefined entries.
pub fn differences(values: &[Option<f64>]) -> Vec<Option<f64>> {
    values
        .windows(2)
        .map(|w| match (w[0], w[1]) {
            (Some(a), Some(b)) => Some(b - a),
            _ => None,
        })
        .collect()
}

fn check_lags(lags: &[u64]) -> Result<()> {
    if lags.is_empty() {
        return Err(Error::domain("lag grid is empty"));
    }
    if lags.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::domain("lags must be strictly ascending"));
    }
    Ok(())
}

/// Plug-in Z-score at every lag of `lags`.
pub fn z_profile(x: &EventSequence, y: &EventSequence, lags: &[u64]) -> Result<LagProfile> {
    check_lags(lags)?;
    let counts = count_profile(x, y, lags)?;
    let rates = RatePair::estimate(x, y);
    let stats: Vec<BandStatistic> =
        lags.iter().zip(&counts).map(|(&lag, &c)| BandStatistic::from_rates(c, rates, x.horizon(), lag)).collect();
    let z: Vec<Option<f64>> = stats.iter().map(|s| s.z).collect();
    Ok(LagProfile {
        horizon: x.horizon(),
        n_x: x.len() as u64,
        n_y: y.len() as u64,
        lags: lags.to_vec(),
        dz: differences(&z),
        z,
        stats,
    })
}

/// Which rates standardize simulated counts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "rates", rename_all = "snake_case")]
pub enum ZRates {
    /// `n / T` of each simulated sequence.
    PlugIn,
    Known {
        p_x: f64,
        p_y: f64,
    },
}

/// Across-trial summary of simulated Z profiles.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProfileSummary {
    pub version: String,
    pub seed: u64,
    pub horizon: u64,
    pub trials: usize,
    pub rates: ZRates,
    pub lags: Vec<u64>,
    /// Trials with a defined Z at each lag.
    pub defined: Vec<usize>,
    pub mean_z: Vec<Option<f64>>,
    pub std_z: Vec<Option<f64>>,
    /// First differences of `mean_z`.
    pub dz_of_mean: Vec<Option<f64>>,
}

impl ProfileSummary {
    /// Lag and value of the largest defined mean Z.
    pub fn peak(&self) -> Option<(u64, f64)> {
        argmax(&self.mean_z).map(|k| (self.lags[k], self.mean_z[k].unwrap()))
    }

    /// Lag (left end of the difference) with the steepest rise of the mean Z.
    pub fn steepest_rise(&self) -> Option<(u64, f64)> {
        argmax(&self.dz_of_mean).map(|k| (self.lags[k], self.dz_of_mean[k].unwrap()))
    }
}

fn argmax(values: &[Option<f64>]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (k, v) in values.iter().enumerate() {
        if let Some(v) = *v {
            if best.is_none_or(|(_, b)| v > b) {
                best = Some((k, v));
            }
        }
    }
    best.map(|(k, _)| k)
}

/// Per-lag mean and spread of the Z-score over simulated pairs. Lags must be
/// strictly ascending.
pub fn summarize_profiles(samples: &CountSamples, rates: ZRates) -> Result<ProfileSummary> {
    check_lags(&samples.lags)?;
    let t = samples.horizon;
    let mut defined = Vec::new();
    let mut mean_z = Vec::new();
    let mut std_z = Vec::new();
    for (k, &lag) in samples.lags.iter().enumerate() {
        let zs: Vec<f64> = samples
            .pairs
            .iter()
            .filter_map(|p| {
                let r = match rates {
                    ZRates::PlugIn => RatePair { p_x: p.n_x as f64 / t as f64, p_y: p.n_y as f64 / t as f64 },
                    ZRates::Known { p_x, p_y } => RatePair { p_x, p_y },
                };
                BandStatistic::from_rates(p.counts[k], r, t, lag).z
            })
            .collect();
        defined.push(zs.len());
        mean_z.push((!zs.is_empty()).then(|| mean(&zs)));
        std_z.push(sample_std(&zs));
    }
    Ok(ProfileSummary {
        version: crate::VERSION.to_string(),
        seed: samples.seed,
        horizon: t,
        trials: samples.pairs.len(),
        rates,
        lags: samples.lags.clone(),
        defined,
        dz_of_mean: differences(&mean_z),
        mean_z,
        std_z,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn differences_propagate_undefined() {
        let z = [Some(1.0), Some(3.0), None, Some(4.0), Some(2.5)];
        assert_eq!(differences(&z), vec![Some(2.0), None, None, Some(-1.5)]);
        assert!(differences(&[Some(1.0)]).is_empty());
    }

    #[test]
    fn profile_lengths_and_validation() {
        let x = EventSequence::new(50, vec![3, 10, 20, 33, 47]).unwrap();
        let y = EventSequence::new(50, vec![5, 11, 30, 40]).unwrap();
        let p = z_profile(&x, &y, &[0, 1, 2, 5, 9]).unwrap();
        assert_eq!(p.z.len(), 5);
        assert_eq!(p.dz.len(), 4);
        assert!(z_profile(&x, &y, &[0, 2, 2]).is_err());
        assert!(z_profile(&x, &y, &[3, 1]).is_err());
        assert!(z_profile(&x, &y, &[]).is_err());
    }

    #[test]
    fn empty_channel_profile_is_undefined() {
        let x = EventSequence::empty(50).unwrap();
        let y = EventSequence::new(50, vec![5, 11]).unwrap();
        let p = z_profile(&x, &y, &[0, 1, 2]).unwrap();
        assert!(p.z.iter().all(Option::is_none));
        assert!(p.dz.iter().all(Option::is_none));
    }
}
