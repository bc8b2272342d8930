//! Seeded randomness.
//!
//! Every random choice in the crate flows from a [`SeededRng`], a PCG-XSL-RR
//! 128/64 generator (`rand_pcg::Pcg64`) whose state is derived from a single
//! `u64` seed through `SeedableRng::seed_from_u64`. Same seed, same stream.

use rand::SeedableRng;

pub type SeededRng = rand_pcg::Pcg64;

pub fn seeded_rng(seed: u64) -> SeededRng {
    SeededRng::seed_from_u64(seed)
}
