//! Exact coincidence-count statistics for pairs of binary point processes.
//!
//! Given two event sequences on `1..=T`, [`band::count_coincidences`] counts
//! event pairs closer than a lag `delta`; [`band::expected_marks`] and
//! [`band::sigma_delta_sq`] give the count's mean and asymptotic variance
//! when the sequences are independent, and [`band::z_score`] turns the three
//! into a Z-score that needs neither surrogates nor a choice of bin width
//! beyond the sampling grid.
//!
//! The [`generators`] produce sequences with known ground truth, the
//! [`montecarlo`] harness checks the closed forms against simulation, and
//! [`screening`] applies the Z-score to every pair of a multi-channel
//! recording.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod band;
pub mod error;
pub mod events;
pub mod generators;
pub mod io;
pub mod montecarlo;
pub mod screening;
pub mod seeding;
pub mod validation;

pub use band::{
    band_area, count_coincidences, count_profile, expected_marks, sigma_delta_sq, truncated_count, z_score,
    z_score_with_rates, BandStatistic,
};
pub use error::{Error, Result};
pub use events::{EventSequence, RatePair, MAX_HORIZON};
pub use screening::{screen, EdgeList, Recording, ScreenConfig};

/// Crate version, stamped into every report.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
