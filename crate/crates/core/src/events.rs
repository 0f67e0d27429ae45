//! Binary event records on the discrete horizon `1..=T`.
//!
//! The public data model is 1-based. Event indices are stored exactly as
//! they appear in that model; internal routines that need offsets convert
//! locally.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest horizon accepted. Keeps `T * T` representable in a `u64`.
pub const MAX_HORIZON: u64 = u32::MAX as u64;

/// A binarized event record: `horizon` bins, of which the bins listed in
/// `events` (strictly increasing, each in `1..=horizon`) are occupied.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawSequence", into = "RawSequence")]
pub struct EventSequence {
    horizon: u64,
    events: Vec<u64>,
}

#[derive(Serialize, Deserialize)]
struct RawSequence {
    horizon: u64,
    events: Vec<u64>,
}

impl TryFrom<RawSequence> for EventSequence {
    type Error = Error;

    fn try_from(raw: RawSequence) -> Result<Self> {
        EventSequence::new(raw.horizon, raw.events)
    }
}

impl From<EventSequence> for RawSequence {
    fn from(seq: EventSequence) -> Self {
        RawSequence { horizon: seq.horizon, events: seq.events }
    }
}

impl EventSequence {
    /// Validates and wraps a strictly increasing list of 1-based indices.
    pub fn new(horizon: u64, events: Vec<u64>) -> Result<Self> {
        check_horizon(horizon)?;
        if let Some(&first) = events.first() {
            if first < 1 {
                return Err(Error::domain("event index 0 is outside 1..=T"));
            }
        }
        for w in events.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::domain(format!(
                    "event indices must be strictly increasing ({} then {})",
                    w[0], w[1]
                )));
            }
        }
        if let Some(&last) = events.last() {
            if last > horizon {
                return Err(Error::domain(format!("event index {last} exceeds horizon {horizon}")));
            }
        }
        Ok(EventSequence { horizon, events })
    }

    /// Builds a sequence from arbitrary indices, sorting and collapsing
    /// duplicates. Returns the sequence and the number of duplicates removed.
    pub fn from_unsorted(horizon: u64, mut events: Vec<u64>) -> Result<(Self, usize)> {
        events.sort_unstable();
        let before = events.len();
        events.dedup();
        let dropped = before - events.len();
        Ok((EventSequence::new(horizon, events)?, dropped))
    }

    /// Builds a sequence from a per-bin occupancy vector (bin `k` is index `k + 1`).
    pub fn from_occupancy(bins: &[bool]) -> Result<Self> {
        let events = bins.iter().enumerate().filter(|(_, &b)| b).map(|(k, _)| k as u64 + 1).collect();
        EventSequence::new(bins.len() as u64, events)
    }

    pub fn empty(horizon: u64) -> Result<Self> {
        EventSequence::new(horizon, Vec::new())
    }

    pub fn full(horizon: u64) -> Result<Self> {
        check_horizon(horizon)?;
        Ok(EventSequence { horizon, events: (1..=horizon).collect() })
    }

    // Callers guarantee the invariants (generators build sorted, in-range output).
    pub(crate) fn from_sorted_unchecked(horizon: u64, events: Vec<u64>) -> Self {
        debug_assert!(events.windows(2).all(|w| w[0] < w[1]));
        debug_assert!(events.iter().all(|&e| (1..=horizon).contains(&e)));
        EventSequence { horizon, events }
    }

    pub fn horizon(&self) -> u64 {
        self.horizon
    }

    pub fn events(&self) -> &[u64] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Plug-in rate estimate `n / T`.
    pub fn rate(&self) -> f64 {
        self.events.len() as f64 / self.horizon as f64
    }

    pub fn occupancy(&self) -> Vec<bool> {
        let mut bins = vec![false; self.horizon as usize];
        for &e in &self.events {
            bins[(e - 1) as usize] = true;
        }
        bins
    }

    /// Gaps between consecutive events.
    pub fn inter_event_intervals(&self) -> Vec<u64> {
        self.events.windows(2).map(|w| w[1] - w[0]).collect()
    }
}

fn check_horizon(horizon: u64) -> Result<()> {
    if horizon == 0 {
        return Err(Error::domain("horizon must be at least 1"));
    }
    if horizon > MAX_HORIZON {
        return Err(Error::domain(format!("horizon {horizon} exceeds the supported maximum {MAX_HORIZON}")));
    }
    Ok(())
}

/// Per-bin success probabilities of the two processes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatePair {
    pub p_x: f64,
    pub p_y: f64,
}

impl RatePair {
    pub fn new(p_x: f64, p_y: f64) -> Result<Self> {
        for (name, p) in [("p_x", p_x), ("p_y", p_y)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::domain(format!("{name} = {p} is not a probability")));
            }
        }
        Ok(RatePair { p_x, p_y })
    }

    /// Plug-in estimate from two observed sequences.
    pub fn estimate(x: &EventSequence, y: &EventSequence) -> Self {
        RatePair { p_x: x.rate(), p_y: y.rate() }
    }

    pub fn swapped(self) -> Self {
        RatePair { p_x: self.p_y, p_y: self.p_x }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_out_of_range_and_unsorted() {
        assert!(EventSequence::new(5, vec![0, 2]).is_err());
        assert!(EventSequence::new(5, vec![2, 6]).is_err());
        assert!(EventSequence::new(5, vec![3, 2]).is_err());
        assert!(EventSequence::new(5, vec![2, 2]).is_err());
        assert!(EventSequence::new(0, vec![]).is_err());
        assert!(EventSequence::new(MAX_HORIZON + 1, vec![]).is_err());
    }

    #[test]
    fn duplicates_collapse() {
        let (seq, dropped) = EventSequence::from_unsorted(5, vec![4, 2, 4, 2, 2]).unwrap();
        assert_eq!(seq.events(), &[2, 4]);
        assert_eq!(dropped, 3);
    }

    #[test]
    fn occupancy_round_trip() {
        let seq = EventSequence::new(5, vec![2, 4]).unwrap();
        let bins = seq.occupancy();
        assert_eq!(bins, vec![false, true, false, true, false]);
        assert_eq!(EventSequence::from_occupancy(&bins).unwrap(), seq);
        assert_eq!(seq.rate(), 0.4);
    }

    #[test]
    fn serde_validates() {
        let bad = r#"{"horizon":3,"events":[1,4]}"#;
        assert!(serde_json::from_str::<EventSequence>(bad).is_err());
        let good = r#"{"horizon":3,"events":[1,3]}"#;
        let seq: EventSequence = serde_json::from_str(good).unwrap();
        assert_eq!(seq.len(), 2);
    }

    #[test]
    fn rate_pair_bounds() {
        assert!(RatePair::new(-0.1, 0.5).is_err());
        assert!(RatePair::new(0.5, 1.5).is_err());
        assert!(RatePair::new(f64::NAN, 0.5).is_err());
        assert!(RatePair::new(0.0, 1.0).is_ok());
    }
}
