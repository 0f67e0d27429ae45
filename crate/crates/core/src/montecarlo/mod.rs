//! Monte Carlo validation harness: agreement of simulated and analytical
//! moments, KS normality testing, normality-onset scans and Z-score lag
//! profiles.

mod agreement;
mod ks;
mod profile;
mod samples;
mod scan;
mod stats;

pub use agreement::{
    estimate_agreement, estimate_agreement_with, summarize_agreement, AgreementConfig, LagAgreement, MonteCarloReport,
    RateMode,
};
pub use ks::{kolmogorov_sf, ks_normality, ks_statistic, ks_test, ks_two_sample, KsResult, MIN_KS_SAMPLES};
pub use profile::{differences, summarize_profiles, z_profile, LagProfile, ProfileSummary, ZRates};
pub use samples::{simulate_counts, CountSamples, PairCounts};
pub use scan::{normality_scan, LagRule, NormalityScan, ScanCell, ScanConfig, ScanPoint, NORMALITY_LEVEL};
pub use stats::{mean, nrmse, pairwise_sum, sample_std};
