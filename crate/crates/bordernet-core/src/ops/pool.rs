//! 2x2 max pooling with stored argmax routing.

use crate::error::{CoreError, Result};
use crate::tensor::Tensor;

/// Pool each non-overlapping 2x2 window down to its maximum.
///
/// Returns the pooled tensor plus one flat input index per output element,
/// which the backward pass uses to route gradient. Ties go to the first
/// position in row-major scan order of the window.
pub fn maxpool2x2_forward(input: &Tensor) -> Result<(Tensor, Vec<u32>)> {
    if input.rank() != 4 {
        return Err(CoreError::ShapeMismatch(format!(
            "maxpool2x2 expects rank-4 input, got {:?}",
            input.shape()
        )));
    }
    let (n, c, h, w) = (input.dim(0), input.dim(1), input.dim(2), input.dim(3));
    if h % 2 != 0 || w % 2 != 0 {
        return Err(CoreError::ShapeMismatch(format!(
            "maxpool2x2 needs even spatial dims, got {}x{}",
            h, w
        )));
    }
    let (ho, wo) = (h / 2, w / 2);
    let mut out = Tensor::zeros(&[n, c, ho, wo]);
    let mut argmax = vec![0u32; n * c * ho * wo];
    let data = input.data();
    let out_data = out.data_mut();
    for img in 0..n {
        for ch in 0..c {
            let base = (img * c + ch) * h * w;
            let obase = (img * c + ch) * ho * wo;
            for oy in 0..ho {
                for ox in 0..wo {
                    let i00 = base + (2 * oy) * w + 2 * ox;
                    // Window scan order (0,0),(0,1),(1,0),(1,1); strict
                    // comparisons keep the first maximum.
                    let candidates = [i00, i00 + 1, i00 + w, i00 + w + 1];
                    let mut best = candidates[0];
                    let mut best_v = data[best];
                    for &idx in &candidates[1..] {
                        if data[idx] > best_v {
                            best = idx;
                            best_v = data[idx];
                        }
                    }
                    out_data[obase + oy * wo + ox] = best_v;
                    argmax[obase + oy * wo + ox] = best as u32;
                }
            }
        }
    }
    Ok((out, argmax))
}

/// Route `upstream` back to the positions recorded by the forward pass.
pub fn maxpool2x2_backward(upstream: &Tensor, argmax: &[u32]) -> Result<Tensor> {
    if upstream.rank() != 4 {
        return Err(CoreError::ShapeMismatch(format!(
            "maxpool2x2_backward expects rank-4 upstream, got {:?}",
            upstream.shape()
        )));
    }
    if upstream.len() != argmax.len() {
        return Err(CoreError::ShapeMismatch(format!(
            "upstream has {} elements but {} argmax entries were recorded",
            upstream.len(),
            argmax.len()
        )));
    }
    let (n, c, ho, wo) = (
        upstream.dim(0),
        upstream.dim(1),
        upstream.dim(2),
        upstream.dim(3),
    );
    let mut grad = Tensor::zeros(&[n, c, 2 * ho, 2 * wo]);
    let gdata = grad.data_mut();
    for (i, &src) in argmax.iter().enumerate() {
        gdata[src as usize] += upstream.data()[i];
    }
    Ok(grad)
}
