use rand::Rng;
use rand_distr::{Distribution, Geometric};

use crate::error::{Error, Result};
use crate::events::EventSequence;

/// Independent Bernoulli(`p`) occupancy on `1..=horizon`.
///
/// Walks geometric gaps between successes, so the cost scales with the
/// number of events rather than the horizon.
pub fn bernoulli<R: Rng + ?Sized>(p: f64, horizon: u64, rng: &mut R) -> Result<EventSequence> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::domain(format!("p = {p} is not a probability")));
    }
    if p == 0.0 {
        return EventSequence::empty(horizon);
    }
    if p == 1.0 {
        return EventSequence::full(horizon);
    }
    // validates the horizon
    EventSequence::empty(horizon)?;
    let gaps = Geometric::new(p).map_err(|e| Error::domain(e.to_string()))?;
    let mut events = Vec::with_capacity((p * horizon as f64 * 1.1) as usize + 8);
    let mut pos = 0u64;
    loop {
        pos = pos.saturating_add(gaps.sample(rng)).saturating_add(1);
        if pos > horizon {
            break;
        }
        events.push(pos);
    }
    Ok(EventSequence::from_sorted_unchecked(horizon, events))
}
