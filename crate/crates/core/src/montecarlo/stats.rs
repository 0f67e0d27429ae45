//! Order-stable summaries used by the harness.

use crate::error::{Error, Result};

/// Pairwise (cascade) summation; result depends only on the slice order.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const LEAF: usize = 32;
    if values.len() <= LEAF {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

pub fn mean(values: &[f64]) -> f64 {
    pairwise_sum(values) / values.len() as f64
}

/// Sample standard deviation (n - 1 denominator). `None` for fewer than two values.
pub fn sample_std(values: &[f64]) -> Option<f64> {
    if values.len() < 2 {
        return None;
    }
    let m = mean(values);
    let sq: Vec<f64> = values.iter().map(|v| (v - m) * (v - m)).collect();
    Some((pairwise_sum(&sq) / (values.len() - 1) as f64).sqrt())
}

/// Root-mean-square error of `empirical` against `analytical`, divided by
/// the mean absolute analytical value. `Ok(None)` when every analytical
/// value is zero.
pub fn nrmse(empirical: &[f64], analytical: &[f64]) -> Result<Option<f64>> {
    if empirical.len() != analytical.len() || empirical.is_empty() {
        return Err(Error::domain(format!(
            "nrmse needs equal, non-empty inputs (got {} and {})",
            empirical.len(),
            analytical.len()
        )));
    }
    let scale = mean(&analytical.iter().map(|a| a.abs()).collect::<Vec<_>>());
    if scale == 0.0 {
        return Ok(None);
    }
    let sq: Vec<f64> = empirical.iter().zip(analytical).map(|(e, a)| (e - a) * (e - a)).collect();
    Ok(Some(mean(&sq).sqrt() / scale))
}
