//! One-sample Kolmogorov-Smirnov tests with asymptotic p-values.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// Smallest sample accepted by [`ks_normality`].
pub const MIN_KS_SAMPLES: usize = 8;

const SERIES_EPS: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
    pub n: usize,
}

/// Survival function of the Kolmogorov distribution, `P(K > x)`.
///
/// Uses the alternating series `2 sum (-1)^(k-1) exp(-2 k^2 x^2)` for larger
/// `x` and the Jacobi-theta form of the CDF for small `x`; both stop once a
/// term falls below `1e-10`.
pub fn kolmogorov_sf(x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x < 1.0 {
        // P(K <= x) = sqrt(2 pi) / x * sum_{k>=1} exp(-(2k-1)^2 pi^2 / (8 x^2))
        let scale = std::f64::consts::PI * std::f64::consts::PI / (8.0 * x * x);
        let mut cdf = 0.0;
        for k in 1.. {
            let odd = (2 * k - 1) as f64;
            let term = (-odd * odd * scale).exp();
            cdf += term;
            if term < SERIES_EPS {
                break;
            }
        }
        let cdf = cdf * (2.0 * std::f64::consts::PI).sqrt() / x;
        return (1.0 - cdf).clamp(0.0, 1.0);
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1.. {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * x * x).exp();
        sum += sign * term;
        if term < SERIES_EPS {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// `sup |F_n - F|` for the given samples against the continuous CDF `cdf`.
pub fn ks_statistic(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (((i + 1) as f64 / n) - f).max(f - i as f64 / n)
        })
        .fold(0.0, f64::max)
}

/// Asymptotic one-sample test of `samples` against `cdf`.
pub fn ks_test(samples: &[f64], cdf: impl Fn(f64) -> f64) -> Result<KsResult> {
    if samples.len() < MIN_KS_SAMPLES {
        return Err(Error::domain(format!("KS test needs at least {MIN_KS_SAMPLES} samples, got {}", samples.len())));
    }
    if samples.iter().any(|v| v.is_nan()) {
        return Err(Error::domain("KS test samples contain NaN"));
    }
    let statistic = ks_statistic(samples, cdf);
    let n = samples.len();
    Ok(KsResult { statistic, p_value: kolmogorov_sf((n as f64).sqrt() * statistic), n })
}

/// Tests already-standardized samples against the standard normal.
///
/// No parameters are estimated from the sample, so no Lilliefors correction
/// applies.
pub fn ks_normality(samples: &[f64]) -> Result<KsResult> {
    let normal = Normal::standard();
    ks_test(samples, |x| normal.cdf(x))
}

/// Two-sample statistic and asymptotic p-value, effective size `nm / (n + m)`.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<KsResult> {
    if a.len() < MIN_KS_SAMPLES || b.len() < MIN_KS_SAMPLES {
        return Err(Error::domain("two-sample KS needs at least 8 samples per side"));
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        let v = a[i].min(b[j]);
        while i < a.len() && a[i] <= v {
            i += 1;
        }
        while j < b.len() && b[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    let en = (na * nb / (na + nb)).sqrt();
    Ok(KsResult { statistic: d, p_value: kolmogorov_sf(en * d), n: a.len() + b.len() })
}
