//! The four fixed 7x7 front filters: oriented stripes and their
//! parameter-matched random controls.
//!
//! An oriented filter is a centered stripe of ones (width 3 by default) on a
//! zero background, one filter per orientation. Random banks draw every entry
//! i.i.d. uniform on [0,1) from a ChaCha8 stream keyed by (seed, filter
//! index), so regeneration is bit-identical everywhere.

use crate::error::{CoreError, Result};
use crate::rng;
use crate::tensor::Tensor;
use serde::{Deserialize, Serialize};

pub const FILTER_SIZE: usize = 7;
pub const STRIPE_WIDTH: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    Horizontal,
    Vertical,
    DiagonalMain,
    DiagonalAnti,
}

impl Orientation {
    /// Canonical application order of the front filters.
    pub const ALL: [Orientation; 4] = [
        Orientation::Horizontal,
        Orientation::Vertical,
        Orientation::DiagonalMain,
        Orientation::DiagonalAnti,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Orientation::Horizontal => "horizontal",
            Orientation::Vertical => "vertical",
            Orientation::DiagonalMain => "diagonal_main",
            Orientation::DiagonalAnti => "diagonal_anti",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BankKind {
    Oriented,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// Stripe entries exactly 1, background exactly 0.
    RawOnes,
    /// Each kernel divided by the sum of its absolute entries.
    L1Normalized,
}

/// Four 7x7 kernels in fixed order plus how they were constructed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterBank {
    /// Shape [1,1,7,7] each, in the order of [`Orientation::ALL`] for
    /// oriented banks and by filter index for random banks.
    pub kernels: Vec<Tensor>,
    pub kind: BankKind,
    pub seed: Option<u64>,
    pub normalization: Normalization,
}

/// Build one oriented stripe filter as a `size`x`size` tensor.
///
/// Entry (r,c) is 1 iff it lies within the centered stripe of the requested
/// width, measured across rows for Horizontal, across columns for Vertical,
/// and across |r−c| (resp. |r+c−(size−1)|) for the diagonals.
pub fn make_oriented_filter(
    orientation: Orientation,
    size: usize,
    stripe_width: usize,
) -> Result<Tensor> {
    if size % 2 == 0 || size == 0 {
        return Err(CoreError::InvalidArgument(format!(
            "filter size must be odd and positive, got {size}"
        )));
    }
    if stripe_width == 0 || stripe_width > size {
        return Err(CoreError::InvalidArgument(format!(
            "stripe width {stripe_width} must be in [1, {size}]"
        )));
    }
    let mid = (size - 1) / 2;
    let half = (stripe_width - 1) / 2;
    let mut t = Tensor::zeros(&[size, size]);
    for r in 0..size {
        for c in 0..size {
            let inside = match orientation {
                Orientation::Horizontal => r.abs_diff(mid) <= half,
                Orientation::Vertical => c.abs_diff(mid) <= half,
                Orientation::DiagonalMain => r.abs_diff(c) <= half,
                Orientation::DiagonalAnti => (r + c).abs_diff(size - 1) <= half,
            };
            if inside {
                t.set2(r, c, 1.0);
            }
        }
    }
    Ok(t)
}

/// The four oriented stripe filters at the standard 7x7 / width-3 geometry,
/// unnormalized.
pub fn make_oriented_filter_bank() -> FilterBank {
    let kernels = Orientation::ALL
        .iter()
        .map(|&o| {
            make_oriented_filter(o, FILTER_SIZE, STRIPE_WIDTH)
                .expect("standard geometry is valid")
                .reshape(&[1, 1, FILTER_SIZE, FILTER_SIZE])
                .expect("size matches")
        })
        .collect();
    FilterBank {
        kernels,
        kind: BankKind::Oriented,
        seed: None,
        normalization: Normalization::RawOnes,
    }
}

/// Four random 7x7 kernels, entries i.i.d. uniform on [0,1).
pub fn make_random_filter_bank(seed: u64) -> FilterBank {
    let kernels = (0..4u64)
        .map(|idx| {
            let mut r = rng::stream_rng(seed, rng::streams::FILTER_BANK + idx);
            let data = (0..FILTER_SIZE * FILTER_SIZE)
                .map(|_| rng::next_unit_f32(&mut r))
                .collect();
            Tensor::from_vec(&[1, 1, FILTER_SIZE, FILTER_SIZE], data).expect("49 entries")
        })
        .collect();
    FilterBank {
        kernels,
        kind: BankKind::Random,
        seed: Some(seed),
        normalization: Normalization::RawOnes,
    }
}

/// Divide each kernel by the sum of its absolute entries.
///
/// Rejects kernels with zero L1 mass. Applying this to an already normalized
/// bank divides by 1 (up to rounding).
pub fn normalize_l1(bank: &FilterBank) -> Result<FilterBank> {
    let mut kernels = Vec::with_capacity(bank.kernels.len());
    for k in &bank.kernels {
        let mass: f64 = k.iter().map(|v| f64::from(v.abs())).sum();
        if mass == 0.0 {
            return Err(CoreError::DegenerateFilter);
        }
        let scale = (1.0 / mass) as f32;
        kernels.push(
            Tensor::from_vec(k.shape(), k.iter().map(|v| v * scale).collect())
                .expect("same length"),
        );
    }
    Ok(FilterBank {
        kernels,
        kind: bank.kind,
        seed: bank.seed,
        normalization: Normalization::L1Normalized,
    })
}

impl FilterBank {
    /// Human-readable label for kernel `i` ("horizontal" etc. or "random_i").
    pub fn kernel_label(&self, i: usize) -> String {
        match self.kind {
            BankKind::Oriented => Orientation::ALL[i].label().to_string(),
            BankKind::Random => format!("random_{i}"),
        }
    }

    /// Render kernel `i` as a plain-text grid, one row per line.
    pub fn kernel_text(&self, i: usize) -> String {
        let k = &self.kernels[i];
        let size = k.dim(2);
        let mut out = String::new();
        for r in 0..size {
            let row: Vec<String> = (0..size)
                .map(|c| format!("{:.6}", k.data()[r * size + c]))
                .collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        out
    }
}
