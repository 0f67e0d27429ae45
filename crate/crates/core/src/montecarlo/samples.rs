use serde::Serialize;

use crate::band::count_profile;
use crate::error::{Error, Result};
use crate::events::EventSequence;
use crate::seeding::{run_trials, SimRng};

/// Event counts and per-lag coincidence counts of one simulated pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairCounts {
    pub n_x: u64,
    pub n_y: u64,
    pub counts: Vec<u64>,
}

/// Coincidence counts of many simulated pairs at a shared lag grid.
/// Every lag of a trial comes from the same simulated pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CountSamples {
    pub horizon: u64,
    pub lags: Vec<u64>,
    pub seed: u64,
    pub pairs: Vec<PairCounts>,
}

impl CountSamples {
    /// Counts at lag position `k` across all trials, as reals.
    pub fn column(&self, k: usize) -> Vec<f64> {
        self.pairs.iter().map(|p| p.counts[k] as f64).collect()
    }
}

/// Draws `trials` pairs from `sampler` on per-trial streams of `(seed, stream)`
/// and counts coincidences at every lag.
pub fn simulate_counts<F>(
    sampler: F,
    lags: &[u64],
    trials: usize,
    seed: u64,
    stream: u64,
    workers: usize,
) -> Result<CountSamples>
where
    F: Fn(&mut SimRng) -> Result<(EventSequence, EventSequence)> + Sync,
{
    if lags.is_empty() {
        return Err(Error::domain("lag grid is empty"));
    }
    let results = run_trials(seed, stream, trials, workers, |_, rng| {
        let (x, y) = sampler(rng)?;
        let counts = count_profile(&x, &y, lags)?;
        Ok((x.horizon(), PairCounts { n_x: x.len() as u64, n_y: y.len() as u64, counts }))
    })?;
    let horizon = results.first().map(|r| r.0).unwrap_or(0);
    if results.iter().any(|r| r.0 != horizon) {
        return Err(Error::domain("sampler produced pairs with differing horizons"));
    }
    Ok(CountSamples { horizon, lags: lags.to_vec(), seed, pairs: results.into_iter().map(|r| r.1).collect() })
}
