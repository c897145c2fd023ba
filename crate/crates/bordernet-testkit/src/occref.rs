//! Occluded-pixel counting by diagonal populations.
//!
//! Instead of scanning pixels, walk each diagonal index once: a diagonal is
//! either fully occluded or fully clear, and its population on an h×w grid
//! is a closed-form count. Agreement with the engine's per-pixel mask is
//! what the oracle tests assert.

use bordernet_core::occlusion::{Direction, OcclusionSpec};

/// Number of grid cells on one diagonal of an `h`×`w` grid.
///
/// For [`Direction::Anti`] the diagonal is `d = r + c`, ranging over
/// `0..=h+w-2`; for [`Direction::Main`] it is `d = r - c`, ranging over
/// `-(w-1)..=h-1`.
pub fn diagonal_population(direction: Direction, h: usize, w: usize, d: i64) -> usize {
    let (h, w) = (h as i64, w as i64);
    let count = match direction {
        Direction::Anti => {
            // r ∈ [max(0, d-w+1), min(h-1, d)]
            d.min(h - 1) - (d - w + 1).max(0) + 1
        }
        Direction::Main => {
            // r ∈ [max(0, d), min(h-1, w-1+d)]
            (h - 1).min(w - 1 + d) - d.max(0) + 1
        }
    };
    count.max(0) as usize
}

/// Total occluded pixels, summing populations of the occluded diagonals.
pub fn occluded_count_by_diagonals(spec: &OcclusionSpec, h: usize, w: usize) -> usize {
    let period = i64::from(spec.width + spec.spacing);
    let range: Vec<i64> = match spec.direction {
        Direction::Anti => (0..=(h + w - 2) as i64).collect(),
        Direction::Main => (-((w as i64) - 1)..=(h as i64 - 1)).collect(),
    };
    range
        .into_iter()
        .filter(|d| (d + i64::from(spec.phase)).rem_euclid(period) < i64::from(spec.width))
        .map(|d| diagonal_population(spec.direction, h, w, d))
        .sum()
}
