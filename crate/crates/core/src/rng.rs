//! Seed handling.
//!
//! Every random draw in the crate comes from a [`ChaCha8Rng`] built from an
//! explicit `u64`. ChaCha is counter based, so streams are identical across
//! platforms. Replicate `i` of a run seeded with `base` uses `base + i`;
//! independent sub-streams inside one replicate are split off with
//! [`derive_seed`].

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Deterministic generator for `seed`.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Mixes `seed` with a stream label using the SplitMix64 finalizer.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed.wrapping_add(stream.wrapping_mul(0x9E37_79B9_7F4A_7C15)).wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for replicate `index` of a run seeded with `base`.
pub fn replicate_seed(base: u64, index: u64) -> u64 {
    base.wrapping_add(index)
}
