use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::poisson::{binarize, poisson_arrival_bins};
use crate::error::{Error, Result};
use crate::events::EventSequence;

/// Delayed bivariate common shock model on unit bins.
///
/// `X1 = Y1 + Z` and `X2 = Y2 + Z*`, where `Y1`, `Y2`, `Z` are independent
/// Poisson processes and `Z*` moves every arrival of `Z` by an independent
/// `Normal(mu_delay, sigma_delay)` delay rounded to the nearest bin. Shifted
/// arrivals outside `1..=horizon` are dropped; bins are binarized.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CommonShock {
    pub lambda_y1: f64,
    pub lambda_y2: f64,
    pub lambda_z: f64,
    pub mu_delay: f64,
    pub sigma_delay: f64,
    pub horizon: u64,
}

impl CommonShock {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("lambda_y1", self.lambda_y1),
            ("lambda_y2", self.lambda_y2),
            ("lambda_z", self.lambda_z),
            ("sigma_delay", self.sigma_delay),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::domain(format!("{name} = {v} must be finite and non-negative")));
            }
        }
        if !self.mu_delay.is_finite() {
            return Err(Error::domain("mu_delay must be finite"));
        }
        EventSequence::empty(self.horizon).map(|_| ())
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<(EventSequence, EventSequence)> {
        self.validate()?;
        let t = self.horizon;
        let tf = t as f64;
        let mut x1 = poisson_arrival_bins(self.lambda_y1 * tf, t, rng)?;
        let mut x2 = poisson_arrival_bins(self.lambda_y2 * tf, t, rng)?;
        let z = poisson_arrival_bins(self.lambda_z * tf, t, rng)?;

        let delay = if self.sigma_delay > 0.0 {
            Some(Normal::new(self.mu_delay, self.sigma_delay).map_err(|e| Error::domain(e.to_string()))?)
        } else {
            None
        };
        for &shock in &z {
            let shift = match &delay {
                Some(normal) => normal.sample(rng),
                None => self.mu_delay,
            }
            .round();
            let moved = shock as f64 + shift;
            if moved >= 1.0 && moved <= tf {
                x2.push(moved as u64);
            }
        }
        x1.extend_from_slice(&z);
        Ok((binarize(t, x1), binarize(t, x2)))
    }
}
