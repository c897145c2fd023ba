//! Deterministic diagonal-stripe occlusions.
//!
//! A stripe pattern is fully determined by its width `w`, the inter-stripe
//! spacing `s`, the diagonal direction, and an integer phase. Pixel (r,c) is
//! occluded iff the diagonal index (`r+c` for anti-diagonal stripes, `r−c`
//! for main-diagonal ones), shifted by the phase and reduced modulo `w+s` to
//! a non-negative residue, falls below `w`. Occluded pixels are painted
//! black (0.0 after the [0,1] scaling).

use crate::error::{CoreError, Result};
use crate::mnist::{Dataset, Provenance};
use serde::{Deserialize, Serialize};
use std::ops::RangeInclusive;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// Stripes along constant `r + c` (top-right to bottom-left).
    Anti,
    /// Stripes along constant `r − c` (top-left to bottom-right).
    Main,
}

impl std::fmt::Display for Direction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Direction::Anti => write!(f, "anti"),
            Direction::Main => write!(f, "main"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OcclusionSpec {
    /// Stripe width in pixels (≥ 1).
    pub width: u32,
    /// Gap between stripes in pixels (≥ 1).
    pub spacing: u32,
    pub direction: Direction,
    /// Diagonal-index offset; shifts the whole pattern.
    pub phase: i32,
}

impl OcclusionSpec {
    /// Anti-diagonal stripes at phase 0 — the benchmark default.
    pub fn new(width: u32, spacing: u32) -> Self {
        OcclusionSpec {
            width,
            spacing,
            direction: Direction::Anti,
            phase: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.width < 1 || self.spacing < 1 {
            return Err(CoreError::InvalidArgument(format!(
                "stripe width and spacing must be at least 1, got w={} s={}",
                self.width, self.spacing
            )));
        }
        Ok(())
    }

    pub fn period(&self) -> u32 {
        self.width + self.spacing
    }

    /// Whether pixel (r, c) falls inside a stripe.
    pub fn occludes(&self, r: usize, c: usize) -> bool {
        let diag = match self.direction {
            Direction::Anti => r as i64 + c as i64,
            Direction::Main => r as i64 - c as i64,
        };
        (diag + self.phase as i64).rem_euclid(self.period() as i64) < self.width as i64
    }

    /// Compact tag for filenames and artifact keys, e.g. `w2-s3-anti-p0`.
    pub fn tag(&self) -> String {
        format!(
            "w{}-s{}-{}-p{}",
            self.width, self.spacing, self.direction, self.phase
        )
    }
}

/// Row-major boolean mask of shape `height × width`; true means occluded.
pub fn occlusion_mask(spec: &OcclusionSpec, height: usize, width: usize) -> Result<Vec<bool>> {
    spec.validate()?;
    let mut mask = Vec::with_capacity(height * width);
    for r in 0..height {
        for c in 0..width {
            mask.push(spec.occludes(r, c));
        }
    }
    Ok(mask)
}

/// Paint the stripes of `spec` black over every image; labels untouched.
pub fn apply_occlusion(dataset: &Dataset, spec: &OcclusionSpec) -> Result<Dataset> {
    spec.validate()?;
    let (h, w) = (dataset.height(), dataset.width());
    let mask = occlusion_mask(spec, h, w)?;
    let mut images = dataset.images.clone();
    let px = h * w;
    for img in images.data_mut().chunks_exact_mut(px) {
        for (v, &hit) in img.iter_mut().zip(&mask) {
            if hit {
                *v = 0.0;
            }
        }
    }
    Ok(Dataset {
        images,
        labels: dataset.labels.clone(),
        split: dataset.split,
        provenance: Provenance::Occluded(*spec),
        content_hash: format!("{}+occ:{}", dataset.content_hash, spec.tag()),
    })
}

/// All (w, s) combinations, w outer and s inner, at phase 0 anti-diagonal.
pub fn occlusion_grid(
    w_range: RangeInclusive<u32>,
    s_range: RangeInclusive<u32>,
) -> Vec<OcclusionSpec> {
    let mut specs = Vec::new();
    for w in w_range {
        for s in s_range.clone() {
            specs.push(OcclusionSpec::new(w, s));
        }
    }
    specs
}

/// The benchmark's 10×10 grid: w, s ∈ [1, 10].
pub fn standard_grid() -> Vec<OcclusionSpec> {
    occlusion_grid(1..=10, 1..=10)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mnist::Split;
    use crate::tensor::Tensor;

    fn count(mask: &[bool]) -> usize {
        mask.iter().filter(|&&b| b).count()
    }

    #[test]
    fn half_density_checkerboard_of_stripes() {
        // w=2, s=2 anti-diagonal on 28×28: period 4, residues {0,1} occluded.
        // Diagonal populations pair up so exactly half the pixels are hit.
        let mask = occlusion_mask(&OcclusionSpec::new(2, 2), 28, 28).unwrap();
        assert_eq!(count(&mask), 392);
    }

    #[test]
    fn huge_spacing_occludes_single_diagonal() {
        // Period 56 exceeds the 55 anti-diagonals, so only r+c=0 is hit.
        let mask = occlusion_mask(&OcclusionSpec::new(1, 55), 28, 28).unwrap();
        assert_eq!(count(&mask), 1);
        assert!(mask[0]);
    }

    #[test]
    fn main_direction_follows_r_minus_c() {
        // w=1, s=27: only r−c ≡ 0 (mod 28) survives, i.e. the main diagonal.
        let spec = OcclusionSpec {
            direction: Direction::Main,
            ..OcclusionSpec::new(1, 27)
        };
        let mask = occlusion_mask(&spec, 28, 28).unwrap();
        assert_eq!(count(&mask), 28);
        for r in 0..28 {
            assert!(mask[r * 28 + r]);
        }
    }

    #[test]
    fn phase_translates_the_pattern() {
        let base = OcclusionSpec::new(3, 4);
        let shifted = OcclusionSpec { phase: 2, ..base };
        for r in 0..12usize {
            for c in 0..12usize {
                // Shifting the phase by 2 equals evaluating 2 diagonals later.
                assert_eq!(shifted.occludes(r, c), base.occludes(r + 2, c));
            }
        }
    }

    #[test]
    fn negative_phase_wraps_to_nonnegative_residue() {
        let spec = OcclusionSpec {
            phase: -5,
            ..OcclusionSpec::new(2, 3)
        };
        // (0 + 0 - 5) rem_euclid 5 = 0 < 2 → occluded.
        assert!(spec.occludes(0, 0));
    }

    #[test]
    fn density_approaches_w_over_period_on_large_grids() {
        let spec = OcclusionSpec::new(2, 2);
        let mask = occlusion_mask(&spec, 280, 280).unwrap();
        assert_eq!(count(&mask), 280 * 280 / 2);
    }

    #[test]
    fn zero_width_or_spacing_rejected() {
        assert!(occlusion_mask(&OcclusionSpec::new(0, 3), 8, 8).is_err());
        assert!(occlusion_mask(&OcclusionSpec::new(3, 0), 8, 8).is_err());
    }

    fn tiny_dataset() -> Dataset {
        let data: Vec<f32> = (0..2 * 16).map(|i| (i % 7) as f32 / 8.0).collect();
        Dataset {
            images: Tensor::from_vec(&[2, 1, 4, 4], data).unwrap(),
            labels: vec![1, 2],
            split: Split::Test,
            provenance: Provenance::Clean,
            content_hash: "t".into(),
        }
    }

    #[test]
    fn apply_blacks_masked_pixels_and_keeps_the_rest() {
        let ds = tiny_dataset();
        let spec = OcclusionSpec::new(1, 2);
        let mask = occlusion_mask(&spec, 4, 4).unwrap();
        let out = apply_occlusion(&ds, &spec).unwrap();
        for i in 0..2 {
            for p in 0..16 {
                let before = ds.image(i)[p];
                let after = out.image(i)[p];
                if mask[p] {
                    assert_eq!(after, 0.0);
                } else {
                    assert_eq!(after.to_bits(), before.to_bits());
                }
            }
        }
        assert_eq!(out.labels, ds.labels);
        assert_eq!(out.provenance, Provenance::Occluded(spec));
        // Source untouched.
        assert_eq!(ds.provenance, Provenance::Clean);
        assert!(ds.image(0)[0] >= 0.0);
    }

    #[test]
    fn apply_is_idempotent() {
        let ds = tiny_dataset();
        let spec = OcclusionSpec::new(2, 1);
        let once = apply_occlusion(&ds, &spec).unwrap();
        let twice = apply_occlusion(&once, &spec).unwrap();
        assert_eq!(once.images.data(), twice.images.data());
    }

    #[test]
    fn occluded_fraction_matches_mask_density() {
        let ds = tiny_dataset();
        let spec = OcclusionSpec::new(1, 1);
        let mask = occlusion_mask(&spec, 4, 4).unwrap();
        let out = apply_occlusion(&ds, &spec).unwrap();
        // Every originally-nonzero pixel that went black must be masked.
        for i in 0..2 {
            let blacked = (0..16)
                .filter(|&p| ds.image(i)[p] != 0.0 && out.image(i)[p] == 0.0)
                .count();
            let masked_nonzero = (0..16)
                .filter(|&p| mask[p] && ds.image(i)[p] != 0.0)
                .count();
            assert_eq!(blacked, masked_nonzero);
        }
    }

    #[test]
    fn all_black_image_is_unchanged() {
        let ds = Dataset {
            images: Tensor::zeros(&[1, 1, 4, 4]),
            labels: vec![0],
            split: Split::Test,
            provenance: Provenance::Clean,
            content_hash: "z".into(),
        };
        let out = apply_occlusion(&ds, &OcclusionSpec::new(3, 2)).unwrap();
        assert!(out.images.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn grid_enumerates_all_pairs_in_order() {
        let grid = standard_grid();
        assert_eq!(grid.len(), 100);
        assert_eq!((grid[0].width, grid[0].spacing), (1, 1));
        assert_eq!((grid[1].width, grid[1].spacing), (1, 2));
        assert_eq!((grid[10].width, grid[10].spacing), (2, 1));
        assert_eq!((grid[99].width, grid[99].spacing), (10, 10));
        for spec in &grid {
            spec.validate().unwrap();
            assert_eq!(spec.direction, Direction::Anti);
            assert_eq!(spec.phase, 0);
        }
    }

    #[test]
    fn mask_depends_only_on_spec_and_shape() {
        let spec = OcclusionSpec::new(3, 5);
        let a = occlusion_mask(&spec, 28, 28).unwrap();
        let b = occlusion_mask(&spec, 28, 28).unwrap();
        assert_eq!(a, b);
    }
}
