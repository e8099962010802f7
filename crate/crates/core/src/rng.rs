//! Seed derivation.
//!
//! Every random draw in the crate comes from a ChaCha8 stream keyed by a
//! 64-bit seed derived from the user seed plus a (domain, index) pair. Streams
//! for different trees, rows or replicates never share state, so results do not
//! depend on how work is scheduled across threads, and adding trees or rows
//! leaves earlier streams untouched.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Stream domains. Each one names a distinct consumer of randomness.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Domain {
    SampleRow = 1,
    Tree = 2,
    Holdout = 3,
    PermuteLabels = 4,
    PermuteFit = 5,
    Trial = 6,
    Estimator = 7,
    Jitter = 8,
    SplitData = 9,
    Cell = 10,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes `(seed, domain, index)` into a child seed.
pub fn derive_seed(seed: u64, domain: Domain, index: u64) -> u64 {
    let a = splitmix64(seed ^ 0x5851_F42D_4C95_7F2D);
    let b = splitmix64(a ^ (domain as u64).wrapping_mul(0x2545_F491_4F6C_DD1D));
    splitmix64(b ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// A fresh generator for `(seed, domain, index)`.
pub fn stream(seed: u64, domain: Domain, index: u64) -> StreamRng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, domain, index))
}
