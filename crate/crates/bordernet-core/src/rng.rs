//! Seeded, portable random streams.
//!
//! Everything random in this crate flows through ChaCha8 keyed by a user seed
//! plus a fixed stream id, so runs reproduce bit-identically across platforms.
//! Floats are derived from raw 32-bit draws with an explicit mapping rather
//! than a distribution type, keeping the byte-level behavior pinned.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Stream ids keep independent consumers of the same user seed decorrelated.
pub mod streams {
    /// Random filter bank; filter index is added on top.
    pub const FILTER_BANK: u64 = 0x10;
    /// Weight init; layer index is added on top.
    pub const WEIGHT_INIT: u64 = 0x100;
    /// Per-epoch shuffling; epoch index is added on top.
    pub const SHUFFLE: u64 = 0x1000;
}

/// ChaCha8 generator for (`seed`, `stream`).
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Uniform f32 in [0, 1) from the top 24 bits of one draw.
#[inline]
pub fn next_unit_f32(rng: &mut ChaCha8Rng) -> f32 {
    (rng.next_u32() >> 8) as f32 * (1.0 / 16_777_216.0)
}

/// Uniform f32 in [-bound, bound).
#[inline]
pub fn next_symmetric_f32(rng: &mut ChaCha8Rng, bound: f32) -> f32 {
    (next_unit_f32(rng) * 2.0 - 1.0) * bound
}

/// In-place Fisher-Yates shuffle.
pub fn shuffle_indices(rng: &mut ChaCha8Rng, indices: &mut [usize]) {
    for i in (1..indices.len()).rev() {
        // Unbiased bounded draw by rejection.
        let bound = (i + 1) as u64;
        let zone = u64::from(u32::MAX) - (u64::from(u32::MAX) + 1) % bound;
        let j = loop {
            let v = u64::from(rng.next_u32());
            if v <= zone {
                break (v % bound) as usize;
            }
        };
        indices.swap(i, j);
    }
}
