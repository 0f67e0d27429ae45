use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::events::EventSequence;

/// Occupancy probability of a bin of width `bin` under a Poisson process of
/// rate `lambda`: `1 - exp(-lambda * bin)`.
pub fn poisson_to_bernoulli(lambda: f64, bin: f64) -> f64 {
    -(-lambda * bin).exp_m1()
}

/// Expected number of arrivals collapsed away when a Poisson process of rate
/// `lambda` over `duration` is binarized into bins of width `bin`:
/// `lambda * T - (T / b) * (1 - exp(-lambda * b))`.
pub fn binning_loss(lambda: f64, bin: f64, duration: f64) -> Result<f64> {
    if !(bin > 0.0) {
        return Err(Error::domain(format!("bin size {bin} must be positive")));
    }
    if !(lambda >= 0.0) {
        return Err(Error::domain(format!("rate {lambda} must be non-negative")));
    }
    // clamp tiny negative rounding residue when lambda * bin is small
    Ok((lambda * duration - duration / bin * poisson_to_bernoulli(lambda, bin)).max(0.0))
}

/// Closed-form summary of a binned Poisson process, plus the realized arrival count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoissonBinningReport {
    pub lambda: f64,
    pub bin: f64,
    pub corrected_p: f64,
    pub expected_lost: f64,
    /// Arrivals that fell inside the binned span in this realization.
    pub arrivals: u64,
}

impl PoissonBinningReport {
    /// Realized arrivals lost to binarization.
    pub fn lost(&self, sequence: &EventSequence) -> u64 {
        self.arrivals - sequence.len() as u64
    }
}

/// Bin indices (1-based, `1..=bins`) of Poisson arrivals over `bins` unit-rate
/// bins with mean `mean` arrivals in total. Unsorted, with multiplicity.
pub(crate) fn poisson_arrival_bins<R: Rng + ?Sized>(mean: f64, bins: u64, rng: &mut R) -> Result<Vec<u64>> {
    if mean == 0.0 {
        return Ok(Vec::new());
    }
    let count = Poisson::new(mean).map_err(|e| Error::domain(e.to_string()))?.sample(rng) as u64;
    Ok((0..count).map(|_| rng.random_range(1..=bins)).collect())
}

pub(crate) fn binarize(horizon: u64, mut bins: Vec<u64>) -> EventSequence {
    bins.sort_unstable();
    bins.dedup();
    EventSequence::from_sorted_unchecked(horizon, bins)
}

/// Homogeneous Poisson process of rate `lambda` on `[0, duration)`,
/// discretized into `floor(duration / bin)` bins; a bin is occupied iff at
/// least one arrival fell inside it.
pub fn binned_poisson<R: Rng + ?Sized>(
    lambda: f64,
    bin: f64,
    duration: f64,
    rng: &mut R,
) -> Result<(EventSequence, PoissonBinningReport)> {
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::domain(format!("rate {lambda} must be finite and non-negative")));
    }
    if !(bin > 0.0) || !(duration >= bin) {
        return Err(Error::domain(format!("need bin > 0 and duration >= bin (bin = {bin}, duration = {duration})")));
    }
    let horizon = (duration / bin).floor() as u64;
    EventSequence::empty(horizon)?;
    let arrivals = poisson_arrival_bins(lambda * bin * horizon as f64, horizon, rng)?;
    let report = PoissonBinningReport {
        lambda,
        bin,
        corrected_p: poisson_to_bernoulli(lambda, bin),
        expected_lost: binning_loss(lambda, bin, duration)?,
        arrivals: arrivals.len() as u64,
    };
    Ok((binarize(horizon, arrivals), report))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corrected_p_and_loss_examples() {
        assert!((poisson_to_bernoulli(0.1, 1.0) - 0.095_162_581_964_040_43).abs() < 1e-15);
        let loss = binning_loss(0.1, 1.0, 1000.0).unwrap();
        assert!((loss - 4.837_418_035_959_57).abs() < 1e-9, "{loss}");
        assert_eq!(binning_loss(0.0, 1.0, 1000.0).unwrap(), 0.0);
        assert!(binning_loss(0.1, 0.0, 1000.0).is_err());
    }

    #[test]
    fn loss_matches_series_form() {
        // (T/b) * sum_{n>=2} (n-1) (lb)^n / n! e^{-lb}
        for (lambda, b, t) in [(0.3, 1.0, 500.0), (2.0, 0.25, 40.0), (0.01, 3.0, 9000.0)] {
            let m: f64 = lambda * b;
            let mut term = (-m).exp(); // n = 0
            let mut series = 0.0;
            for n in 1..200u32 {
                term *= m / n as f64;
                if n >= 2 {
                    series += (n - 1) as f64 * term;
                }
            }
            let expected = t / b * series;
            let got = binning_loss(lambda, b, t).unwrap();
            assert!((got - expected).abs() <= 1e-9 * expected.max(1.0), "{got} vs {expected}");
        }
    }
}
