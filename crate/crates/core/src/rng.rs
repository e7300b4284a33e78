//! Seed derivation.
//!
//! Every random task (k-Centres restart, calibration chunk, replicate) gets
//! its own generator seeded by `derive_seed(parent, index)`, so results do
//! not depend on how tasks are scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finalizer applied to `parent` and `index`.
pub fn derive_seed(parent: u64, index: u64) -> u64 {
    let mut z = parent
        .wrapping_add(0x9E37_79B9_7F4A_7C15u64.wrapping_mul(index.wrapping_add(1)));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn rng_from(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Generator for child task `index` of `parent`.
pub fn child_rng(parent: u64, index: u64) -> ChaCha8Rng {
    rng_from(derive_seed(parent, index))
}
