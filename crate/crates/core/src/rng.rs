//! The crate's single random stream.
//!
//! Every randomized operation takes a [`SimRng`]: ChaCha8 from `rand_chacha`
//! 0.3, seeded with [`seeded`] (`SeedableRng::seed_from_u64`, which expands
//! the `u64` through PCG32). Draw order is part of the reproducibility
//! contract, so a given seed yields bit-identical runs on every platform.

pub use rand::{Rng, RngCore, SeedableRng};

pub type SimRng = rand_chacha::ChaCha8Rng;

pub fn seeded(seed: u64) -> SimRng {
    SimRng::seed_from_u64(seed)
}
