//! Seeded randomness.
//!
//! Every random draw in the crate comes from a PCG-64 (XSL-RR 128/64)
//! generator. A root seed fans out into independent streams by selecting a
//! distinct PCG stream increment per purpose, so substrate generation,
//! workload generation and the embedding strategies never share draws.

use rand::SeedableRng;
use rand_pcg::Pcg64;

pub type SimRng = Pcg64;

/// Purposes that own a dedicated stream under one root seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Substrate = 1,
    Workload = 2,
    Pso = 3,
    RandomBaseline = 4,
}

/// Expands a 64-bit value with SplitMix64; used to derive 128-bit states.
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Generator for `stream` under `seed`, optionally keyed further by `key`
/// (e.g. a request id so each request gets its own sequence).
pub fn stream_rng(seed: u64, stream: Stream, key: u64) -> SimRng {
    let hi = splitmix64(seed ^ splitmix64(key));
    let lo = splitmix64(hi ^ seed.rotate_left(17));
    let state = ((hi as u128) << 64) | lo as u128;
    let increment = ((stream as u128) << 64) | key as u128;
    Pcg64::new(state, increment)
}

/// Plain seeding for call sites that need a one-off generator.
pub fn from_seed(seed: u64) -> SimRng {
    Pcg64::seed_from_u64(seed)
}
