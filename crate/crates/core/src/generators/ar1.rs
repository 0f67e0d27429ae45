//! Auto-correlated waiting times from the geometric AR(1) model
//! `X_t = alpha * X_{t-1} + B_t G_t`, where `alpha *` is binomial thinning,
//! `B_t ~ Bernoulli(1 - alpha)` and `G_t ~ Geometric(theta)` on `{0, 1, ...}`.
//! The stationary marginal is `Geometric(theta)` and `corr(X_t, X_{t+k}) = alpha^k`.
//!
//! Event gaps are `X_t + 1` so that no two events share a bin. With
//! `theta = p` the mean gap is `1 / p`, and `alpha = 0` reproduces a
//! Bernoulli(`p`) sequence exactly.

use rand::Rng;
use rand_distr::{Binomial, Distribution, Geometric};

use crate::error::{Error, Result};
use crate::events::EventSequence;

#[derive(Debug, Clone)]
pub struct GeometricAr1 {
    theta: f64,
    alpha: f64,
    innovation: Geometric,
    state: Option<u64>,
}

impl GeometricAr1 {
    /// Chain calibrated so the mean gap between events is `1 / p_target`.
    pub fn new(p_target: f64, alpha: f64) -> Result<Self> {
        if !(p_target > 0.0 && p_target < 1.0) {
            return Err(Error::domain(format!("target rate {p_target} must lie in (0, 1)")));
        }
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::domain(format!("alpha = {alpha} must lie in [0, 1]")));
        }
        let theta = p_target;
        Ok(GeometricAr1 {
            theta,
            alpha,
            innovation: Geometric::new(theta).map_err(|e| Error::domain(e.to_string()))?,
            state: None,
        })
    }

    /// Geometric parameter of the marginal.
    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Next value of the chain (on `{0, 1, ...}`). The first draw comes from
    /// the stationary marginal.
    pub fn next_state<R: Rng + ?Sized>(&mut self, rng: &mut R) -> u64 {
        let next = match self.state {
            None => self.innovation.sample(rng),
            Some(prev) => {
                let survivors = if prev == 0 || self.alpha == 0.0 {
                    0
                } else if self.alpha == 1.0 {
                    prev
                } else {
                    Binomial::new(prev, self.alpha).expect("alpha checked in constructor").sample(rng)
                };
                let fresh = if rng.random_bool(1.0 - self.alpha) { self.innovation.sample(rng) } else { 0 };
                survivors + fresh
            }
        };
        self.state = Some(next);
        next
    }

    /// Next gap between events (always at least 1).
    pub fn next_gap<R: Rng + ?Sized>(&mut self, rng: &mut R) -> u64 {
        self.next_state(rng).saturating_add(1)
    }
}

/// Event sequence whose inter-event gaps follow the geometric AR(1) chain.
/// The first event sits one gap after time 0; events past `horizon` are cut.
pub fn geometric_ar1<R: Rng + ?Sized>(p_target: f64, alpha: f64, horizon: u64, rng: &mut R) -> Result<EventSequence> {
    EventSequence::empty(horizon)?;
    let mut chain = GeometricAr1::new(p_target, alpha)?;
    let mut events = Vec::new();
    let mut pos = 0u64;
    loop {
        pos = pos.saturating_add(chain.next_gap(rng));
        if pos > horizon {
            break;
        }
        events.push(pos);
    }
    Ok(EventSequence::from_sorted_unchecked(horizon, events))
}
