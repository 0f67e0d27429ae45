//! Deterministic per-trial random streams and order-preserving parallel trials.
//!
//! Every trial owns a generator seeded from `(master, stream, index)` through
//! SplitMix64, so results depend only on the master seed and never on how
//! many workers ran them.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};

pub type SimRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for trial `index` of sub-experiment `stream` under `master`.
pub fn derive_seed(master: u64, stream: u64, index: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(master) ^ stream) ^ index)
}

/// Runs `count` trials on `workers` threads (0 = all cores) and returns their
/// results in trial order.
pub fn run_trials<T, F>(master: u64, stream: u64, count: usize, workers: usize, trial: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize, &mut SimRng) -> Result<T> + Sync,
{
    let body = || {
        (0..count)
            .into_par_iter()
            .map(|i| {
                let mut rng = rng_from_seed(derive_seed(master, stream, i as u64));
                trial(i, &mut rng)
            })
            .collect::<Result<Vec<T>>>()
    };
    if workers == 1 {
        // no pool needed; the sequential path gives identical results
        return (0..count).map(|i| trial(i, &mut rng_from_seed(derive_seed(master, stream, i as u64)))).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    pool.install(body)
}
