//! Coincidence counts inside a lag band and their closed-form null moments.
//!
//! A *mark* is a cell `(i, j)` of the `T x T` lattice with an event of `x` at
//! `i` and an event of `y` at `j`. The statistic is the number of marks with
//! `|i - j| <= delta`. Under independent Bernoulli sequences its mean is
//! `p_x p_y A(T, delta)` and its fluctuations are asymptotically normal with
//! variance `sigma_delta^2 * T`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::events::{EventSequence, RatePair};

/// Number of lattice cells with `|i - j| <= delta` in `1..=T` squared.
///
/// Lags at or beyond `T - 1` cover the whole grid and return `T^2`.
/// `horizon` must not exceed [`crate::MAX_HORIZON`].
pub fn band_area(horizon: u64, delta: u64) -> u64 {
    let t = horizon as u128;
    if horizon == 0 {
        return 0;
    }
    if delta >= horizon - 1 {
        return (t * t) as u64;
    }
    let d = delta as u128;
    (t * (2 * d + 1) - d * (d + 1)) as u64
}

fn check_same_horizon(x: &EventSequence, y: &EventSequence) -> Result<()> {
    if x.horizon() != y.horizon() {
        return Err(Error::domain(format!("horizons differ ({} vs {})", x.horizon(), y.horizon())));
    }
    Ok(())
}

/// Exact number of marks in the `delta` band.
///
/// Sliding window over the two sorted index lists; linear in `n_x + n_y`.
pub fn count_coincidences(x: &EventSequence, y: &EventSequence, delta: u64) -> Result<u64> {
    check_same_horizon(x, y)?;
    Ok(window_count(x.events(), y.events(), delta, |_| true))
}

// Counts pairs within `delta`, restricted to x events accepted by `keep`.
fn window_count(xs: &[u64], ys: &[u64], delta: u64, keep: impl Fn(u64) -> bool) -> u64 {
    let mut lo = 0usize;
    let mut hi = 0usize;
    let mut total = 0u64;
    for &i in xs {
        let start = i.saturating_sub(delta);
        let end = i.saturating_add(delta);
        while lo < ys.len() && ys[lo] < start {
            lo += 1;
        }
        if hi < lo {
            hi = lo;
        }
        while hi < ys.len() && ys[hi] <= end {
            hi += 1;
        }
        if keep(i) {
            total += (hi - lo) as u64;
        }
    }
    total
}

/// Coincidence counts at several lags from one pass over the pair.
///
/// Output order follows `lags`. Dense lag sweeps use a distance histogram;
/// short, sparse lag lists fall back to one window pass per lag.
pub fn count_profile(x: &EventSequence, y: &EventSequence, lags: &[u64]) -> Result<Vec<u64>> {
    check_same_horizon(x, y)?;
    let Some(&max_lag) = lags.iter().max() else {
        return Ok(Vec::new());
    };
    let (xs, ys) = (x.events(), y.events());
    let span = max_lag.min(x.horizon().saturating_sub(1));

    let density = ys.len() as f64 / y.horizon() as f64;
    let histogram_cost = xs.len() as f64 * ((2 * span + 1) as f64 * density + 1.0);
    let per_lag_cost = lags.len() as f64 * (xs.len() + ys.len()) as f64;
    if per_lag_cost < histogram_cost {
        return Ok(lags.iter().map(|&d| window_count(xs, ys, d, |_| true)).collect());
    }

    let mut hist = vec![0u64; span as usize + 1];
    let mut lo = 0usize;
    for &i in xs {
        let start = i.saturating_sub(span);
        while lo < ys.len() && ys[lo] < start {
            lo += 1;
        }
        for &j in &ys[lo..] {
            if j > i + span {
                break;
            }
            hist[i.abs_diff(j) as usize] += 1;
        }
    }
    let mut acc = 0u64;
    for h in hist.iter_mut() {
        acc += *h;
        *h = acc;
    }
    Ok(lags.iter().map(|&d| hist[d.min(span) as usize]).collect())
}

/// Marks in the band restricted to rows `delta + 1 <= i <= T - delta - 1`.
///
/// Requires `2 * delta + 2 < T`. Satisfies
/// `truncated <= count <= truncated + (delta + 1)^2`.
pub fn truncated_count(x: &EventSequence, y: &EventSequence, delta: u64) -> Result<u64> {
    check_same_horizon(x, y)?;
    let t = x.horizon();
    if delta.checked_mul(2).and_then(|v| v.checked_add(2)).is_none_or(|v| v >= t) {
        return Err(Error::domain(format!("band of lag {delta} is too wide for horizon {t} (need 2*delta + 2 < T)")));
    }
    let (first, last) = (delta + 1, t - delta - 1);
    Ok(window_count(x.events(), y.events(), delta, |i| (first..=last).contains(&i)))
}

/// Expected number of marks in the band for independent Bernoulli sequences.
pub fn expected_marks(rates: RatePair, horizon: u64, delta: u64) -> f64 {
    rates.p_x * rates.p_y * band_area(horizon, delta) as f64
}

/// Asymptotic per-`sqrt(T)` variance of the coincidence count:
///
/// `(2d+1) pq (1 - pq) + 2d(2d+1) pq (q(1-p) + p(1-q))` with `p = p_x`, `q = p_y`.
pub fn sigma_delta_sq(rates: RatePair, delta: u64) -> f64 {
    let (p, q) = (rates.p_x, rates.p_y);
    let d = delta as f64;
    let pq = p * q;
    (2.0 * d + 1.0) * pq * (1.0 - pq) + 2.0 * d * (2.0 * d + 1.0) * pq * (q * (1.0 - p) + p * (1.0 - q))
}

/// Observed count, null moments and Z-score at a single lag.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandStatistic {
    pub lag: u64,
    pub observed: u64,
    pub expected: f64,
    /// `sigma_delta`; the standard deviation of the count is `sigma * sqrt(T)`.
    pub sigma: f64,
    /// `None` when `sigma == 0`.
    pub z: Option<f64>,
}

impl BandStatistic {
    /// Standardizes `observed` against the null moments at `rates`.
    pub fn from_rates(observed: u64, rates: RatePair, horizon: u64, lag: u64) -> Self {
        let expected = expected_marks(rates, horizon, lag);
        let sigma = sigma_delta_sq(rates, lag).max(0.0).sqrt();
        let z = (sigma > 0.0).then(|| (observed as f64 - expected) / (sigma * (horizon as f64).sqrt()));
        BandStatistic { lag, observed, expected, sigma, z }
    }

    /// Standard deviation of the count, `sigma * sqrt(T)`.
    pub fn sd(&self, horizon: u64) -> f64 {
        self.sigma * (horizon as f64).sqrt()
    }
}

/// Z-score of the observed coincidences with rates estimated as `n / T`.
pub fn z_score(x: &EventSequence, y: &EventSequence, delta: u64) -> Result<BandStatistic> {
    let observed = count_coincidences(x, y, delta)?;
    Ok(BandStatistic::from_rates(observed, RatePair::estimate(x, y), x.horizon(), delta))
}

/// Z-score against externally known rates instead of plug-in estimates.
pub fn z_score_with_rates(x: &EventSequence, y: &EventSequence, delta: u64, rates: RatePair) -> Result<BandStatistic> {
    let observed = count_coincidences(x, y, delta)?;
    Ok(BandStatistic::from_rates(observed, rates, x.horizon(), delta))
}
