//! Stochastic models producing event sequences with known ground truth.
//!
//! Each model has an rng-driven sampler (used by the Monte Carlo harness with
//! derived per-trial streams) and a seed-driven `gen_*` wrapper. A
//! [`GeneratorSpec`] bundles a model with its seed and serializes as a flat
//! key-value table tagged by `model`:
//!
//! ```toml
//! model = "common_shock"
//! lambda_y1 = 0.01
//! lambda_y2 = 0.01
//! lambda_z = 0.01
//! mu_delay = 50.0
//! sigma_delay = 10.0
//! horizon = 10000
//! seed = 7
//! ```

mod ar1;
mod bernoulli;
mod poisson;
mod shock;
mod subsample;

pub use ar1::{geometric_ar1, GeometricAr1};
pub use bernoulli::bernoulli;
pub use poisson::{binned_poisson, binning_loss, poisson_to_bernoulli, PoissonBinningReport};
pub use shock::CommonShock;
pub use subsample::subsample;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::events::EventSequence;
use crate::seeding::rng_from_seed;

pub fn gen_bernoulli(p: f64, horizon: u64, seed: u64) -> Result<EventSequence> {
    bernoulli(p, horizon, &mut rng_from_seed(seed))
}

pub fn gen_binned_poisson(
    lambda: f64,
    bin: f64,
    duration: f64,
    seed: u64,
) -> Result<(EventSequence, PoissonBinningReport)> {
    binned_poisson(lambda, bin, duration, &mut rng_from_seed(seed))
}

pub fn gen_geometric_ar1(p_target: f64, alpha: f64, horizon: u64, seed: u64) -> Result<EventSequence> {
    geometric_ar1(p_target, alpha, horizon, &mut rng_from_seed(seed))
}

pub fn gen_common_shock(model: &CommonShock, seed: u64) -> Result<(EventSequence, EventSequence)> {
    model.sample(&mut rng_from_seed(seed))
}

/// Parameters of one of the supported models.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case", deny_unknown_fields)]
pub enum Model {
    Bernoulli { p: f64, horizon: u64 },
    BinnedPoisson { lambda: f64, bin: f64, duration: f64 },
    GeometricAr1 { p: f64, alpha: f64, horizon: u64 },
    CommonShock { lambda_y1: f64, lambda_y2: f64, lambda_z: f64, mu_delay: f64, sigma_delay: f64, horizon: u64 },
}

/// What a model emits beyond the sequences themselves.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SampleMetadata {
    None,
    Binning(PoissonBinningReport),
    /// Geometric parameter used for the AR(1) chain and the realized event rate.
    Ar1 {
        theta: f64,
        realized_rate: f64,
    },
}

impl Model {
    /// Number of channels one draw produces.
    pub fn channels(&self) -> usize {
        match self {
            Model::CommonShock { .. } => 2,
            _ => 1,
        }
    }

    pub fn horizon(&self) -> u64 {
        match *self {
            Model::Bernoulli { horizon, .. }
            | Model::GeometricAr1 { horizon, .. }
            | Model::CommonShock { horizon, .. } => horizon,
            Model::BinnedPoisson { bin, duration, .. } => (duration / bin).floor() as u64,
        }
    }

    /// Per-bin occupancy probability implied by the parameters, for
    /// single-channel models.
    pub fn nominal_rate(&self) -> Option<f64> {
        match *self {
            Model::Bernoulli { p, .. } | Model::GeometricAr1 { p, .. } => Some(p),
            Model::BinnedPoisson { lambda, bin, .. } => Some(poisson_to_bernoulli(lambda, bin)),
            Model::CommonShock { .. } => None,
        }
    }

    fn common_shock(&self) -> Option<CommonShock> {
        match *self {
            Model::CommonShock { lambda_y1, lambda_y2, lambda_z, mu_delay, sigma_delay, horizon } => {
                Some(CommonShock { lambda_y1, lambda_y2, lambda_z, mu_delay, sigma_delay, horizon })
            }
            _ => None,
        }
    }

    /// Draws one realization: one sequence, or two for the common shock model.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<(Vec<EventSequence>, SampleMetadata)> {
        Ok(match *self {
            Model::Bernoulli { p, horizon } => (vec![bernoulli(p, horizon, rng)?], SampleMetadata::None),
            Model::BinnedPoisson { lambda, bin, duration } => {
                let (seq, report) = binned_poisson(lambda, bin, duration, rng)?;
                (vec![seq], SampleMetadata::Binning(report))
            }
            Model::GeometricAr1 { p, alpha, horizon } => {
                let chain = GeometricAr1::new(p, alpha)?;
                let seq = geometric_ar1(p, alpha, horizon, rng)?;
                let realized_rate = seq.rate();
                (vec![seq], SampleMetadata::Ar1 { theta: chain.theta(), realized_rate })
            }
            Model::CommonShock { .. } => {
                let shock = self.common_shock().expect("matched variant");
                let (a, b) = shock.sample(rng)?;
                (vec![a, b], SampleMetadata::None)
            }
        })
    }
}

/// A model together with the seed that makes its output reproducible.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    #[serde(flatten)]
    pub model: Model,
    pub seed: u64,
}

impl GeneratorSpec {
    pub fn generate(&self) -> Result<(Vec<EventSequence>, SampleMetadata)> {
        self.model.sample(&mut rng_from_seed(self.seed))
    }
}
