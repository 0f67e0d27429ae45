use crate::error::{Error, Result};
use crate::events::EventSequence;

/// Coarsens `x` by a factor `factor`: output bin `k` covers source bins
/// `(k-1)L + 1 ..= kL` and is occupied iff any of them is. The trailing bin
/// may cover fewer than `L` source bins.
///
/// Also returns the effective rate `1 - (1 - p)^L`, with `p = n / T`
/// estimated from `x`.
pub fn subsample(x: &EventSequence, factor: u64) -> Result<(EventSequence, f64)> {
    if factor == 0 {
        return Err(Error::domain("sub-sampling factor must be at least 1"));
    }
    let horizon = x.horizon().div_ceil(factor);
    let mut events: Vec<u64> = x.events().iter().map(|&e| (e - 1) / factor + 1).collect();
    events.dedup();
    let effective_p = 1.0 - (1.0 - x.rate()).powi(factor.min(i32::MAX as u64) as i32);
    Ok((EventSequence::from_sorted_unchecked(horizon, events), effective_p))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_for_unit_factor() {
        let x = EventSequence::new(9, vec![1, 4, 5, 9]).unwrap();
        let (y, p) = subsample(&x, 1).unwrap();
        assert_eq!(y, x);
        assert!((p - 4.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn partial_last_bin_is_kept() {
        let x = EventSequence::new(10, vec![2, 3, 7, 10]).unwrap();
        let (y, _) = subsample(&x, 3).unwrap();
        assert_eq!(y.horizon(), 4);
        assert_eq!(y.events(), &[1, 3, 4]);
    }

    #[test]
    fn full_stays_full() {
        let x = EventSequence::full(23).unwrap();
        for l in 1..8 {
            let (y, p) = subsample(&x, l).unwrap();
            assert_eq!(y.len() as u64, y.horizon());
            assert_eq!(p, 1.0);
        }
    }

    #[test]
    fn effective_rate_formula() {
        // 50 events in 1000 bins
        let x = EventSequence::new(1000, (1..=50).map(|k| k * 20).collect()).unwrap();
        let (_, p) = subsample(&x, 5).unwrap();
        assert!((p - 0.226_219_062_5).abs() < 1e-12, "{p}");
        assert!(subsample(&x, 0).is_err());
    }
}
