//! Local orientation from image gradients.
//!
//! The orientation at a pixel is the angle maximizing the directional
//! response f(θ) = −sin(θ)·∂x I + cos(θ)·∂y I. Only regular points (gradient
//! magnitude above a threshold) carry an angle; the rest are masked out.
//!
//! Pixel conventions, fixed here once: x is the column index increasing
//! rightward, y increases upward, so ∂y at row r looks toward row r−1.

use crate::error::{CoreError, Result};
use crate::tensor::Tensor;

/// Default cutoff on gradient magnitude below which a point is irregular.
pub const DEFAULT_EPS_REG: f32 = 1e-6;

/// Partial derivatives of image intensity, same shape as the image.
#[derive(Debug, Clone)]
pub struct GradientField {
    pub ix: Tensor,
    pub iy: Tensor,
}

/// Angles in [0, 2π) where `regular` is true; masked entries hold 0 and mean
/// "no orientation defined".
#[derive(Debug, Clone)]
pub struct OrientationMap {
    pub theta: Tensor,
    pub regular: Vec<bool>,
}

impl OrientationMap {
    pub fn theta_at(&self, r: usize, c: usize) -> Option<f32> {
        let w = self.theta.dim(1);
        if self.regular[r * w + c] {
            Some(self.theta.at2(r, c))
        } else {
            None
        }
    }

    pub fn regular_count(&self) -> usize {
        self.regular.iter().filter(|&&m| m).count()
    }
}

/// Central differences in the interior, one-sided on the boundary.
pub fn gradient(image: &Tensor) -> Result<GradientField> {
    if image.rank() != 2 {
        return Err(CoreError::ShapeMismatch(format!(
            "gradient expects a 2-D image, got {:?}",
            image.shape()
        )));
    }
    let (h, w) = (image.dim(0), image.dim(1));
    if h < 3 || w < 3 {
        return Err(CoreError::InvalidArgument(format!(
            "image must be at least 3x3, got {h}x{w}"
        )));
    }
    let mut ix = Tensor::zeros(&[h, w]);
    let mut iy = Tensor::zeros(&[h, w]);
    for r in 0..h {
        for c in 0..w {
            let dx = if c == 0 {
                image.at2(r, 1) - image.at2(r, 0)
            } else if c == w - 1 {
                image.at2(r, w - 1) - image.at2(r, w - 2)
            } else {
                0.5 * (image.at2(r, c + 1) - image.at2(r, c - 1))
            };
            // y increases upward: toward smaller row indices.
            let dy = if r == 0 {
                image.at2(0, c) - image.at2(1, c)
            } else if r == h - 1 {
                image.at2(h - 2, c) - image.at2(h - 1, c)
            } else {
                0.5 * (image.at2(r - 1, c) - image.at2(r + 1, c))
            };
            ix.set2(r, c, dx);
            iy.set2(r, c, dy);
        }
    }
    Ok(GradientField { ix, iy })
}

/// Directional response −sin(θ)·ix + cos(θ)·iy at every pixel.
pub fn z_response(grad: &GradientField, theta: f32) -> Tensor {
    let (s, c) = theta.sin_cos();
    Tensor::from_vec(
        grad.ix.shape(),
        grad.ix
            .iter()
            .zip(grad.iy.iter())
            .map(|(&dx, &dy)| -s * dx + c * dy)
            .collect(),
    )
    .expect("same shape")
}

fn wrap_angle(theta: f32) -> f32 {
    use std::f32::consts::TAU;
    let mut t = theta % TAU;
    if t < 0.0 {
        t += TAU;
    }
    // -0.0 % TAU can still be -0.0; normalize the representation too.
    if t >= TAU {
        t = 0.0;
    }
    t
}

/// Shortest angular distance between two angles, in [0, π].
pub fn angular_distance(a: f32, b: f32) -> f32 {
    use std::f32::consts::TAU;
    let d = (wrap_angle(a) - wrap_angle(b)).abs();
    d.min(TAU - d)
}

/// The unique maximizer of f(θ) = −sin(θ)·ix + cos(θ)·iy at each regular
/// point: θ* = atan2(−ix, iy), giving maximum value √(ix²+iy²).
pub fn orientation_map_closed_form(grad: &GradientField, eps_reg: f32) -> OrientationMap {
    let mut theta = Tensor::zeros(grad.ix.shape());
    let mut regular = vec![false; grad.ix.len()];
    for (i, (&dx, &dy)) in grad.ix.iter().zip(grad.iy.iter()).enumerate() {
        let mag = (f64::from(dx) * f64::from(dx) + f64::from(dy) * f64::from(dy)).sqrt() as f32;
        if mag > eps_reg {
            theta.data_mut()[i] = wrap_angle((-dx).atan2(dy));
            regular[i] = true;
        }
    }
    OrientationMap { theta, regular }
}

/// Same argmax evaluated on `n_angles` uniformly spaced angles.
///
/// Ties pick the smallest angle index. This is the slow reference the closed
/// form is checked against.
pub fn orientation_map_bruteforce(
    grad: &GradientField,
    n_angles: usize,
    eps_reg: f32,
) -> Result<OrientationMap> {
    if n_angles == 0 {
        return Err(CoreError::InvalidArgument(
            "n_angles must be positive".into(),
        ));
    }
    // The response has a flat quadratic top at the maximizer, so the scan
    // runs in f64: f32 noise there can push the argmax a whole step off.
    let angles: Vec<f64> = (0..n_angles)
        .map(|k| std::f64::consts::TAU * k as f64 / n_angles as f64)
        .collect();
    let trig: Vec<(f64, f64)> = angles.iter().map(|t| t.sin_cos()).collect();
    let mut theta = Tensor::zeros(grad.ix.shape());
    let mut regular = vec![false; grad.ix.len()];
    for (i, (&dx, &dy)) in grad.ix.iter().zip(grad.iy.iter()).enumerate() {
        let (dx, dy) = (f64::from(dx), f64::from(dy));
        let mag = (dx * dx + dy * dy).sqrt();
        if mag <= f64::from(eps_reg) {
            continue;
        }
        let mut best = 0usize;
        let mut best_v = f64::NEG_INFINITY;
        for (k, &(s, c)) in trig.iter().enumerate() {
            let v = -s * dx + c * dy;
            if v > best_v {
                best_v = v;
                best = k;
            }
        }
        theta.data_mut()[i] = angles[best] as f32;
        regular[i] = true;
    }
    Ok(OrientationMap { theta, regular })
}
