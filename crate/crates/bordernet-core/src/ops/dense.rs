//! Fully connected (affine) layer.

use crate::error::{CoreError, Result};
use crate::tensor::Tensor;

fn check_shapes(input: &Tensor, weights: &Tensor, bias: &Tensor) -> Result<(usize, usize, usize)> {
    if input.rank() != 2 || weights.rank() != 2 || bias.rank() != 1 {
        return Err(CoreError::ShapeMismatch(format!(
            "dense expects input [N,F_in], weights [F_out,F_in], bias [F_out]; got {:?}, {:?}, {:?}",
            input.shape(),
            weights.shape(),
            bias.shape()
        )));
    }
    let (n, f_in) = (input.dim(0), input.dim(1));
    let (f_out, wf_in) = (weights.dim(0), weights.dim(1));
    if wf_in != f_in || bias.dim(0) != f_out {
        return Err(CoreError::ShapeMismatch(format!(
            "dense dims disagree: input {:?}, weights {:?}, bias {:?}",
            input.shape(),
            weights.shape(),
            bias.shape()
        )));
    }
    Ok((n, f_in, f_out))
}

/// y = x · Wᵀ + b for x of shape [N, F_in] and W of shape [F_out, F_in].
pub fn dense_forward(input: &Tensor, weights: &Tensor, bias: &Tensor) -> Result<Tensor> {
    let (n, f_in, f_out) = check_shapes(input, weights, bias)?;
    let mut out = Tensor::zeros(&[n, f_out]);
    unsafe {
        matrixmultiply::sgemm(
            n,
            f_in,
            f_out,
            1.0,
            input.data().as_ptr(),
            f_in as isize,
            1,
            // W transposed via strides.
            weights.data().as_ptr(),
            1,
            f_in as isize,
            0.0,
            out.data_mut().as_mut_ptr(),
            f_out as isize,
            1,
        );
    }
    for row in out.data_mut().chunks_exact_mut(f_out) {
        for (v, b) in row.iter_mut().zip(bias.data()) {
            *v += *b;
        }
    }
    out.ensure_finite("dense_forward")?;
    Ok(out)
}

/// Exact adjoints of [`dense_forward`]: (dL/dx, dL/dW, dL/db).
pub fn dense_backward(
    upstream: &Tensor,
    saved_input: &Tensor,
    weights: &Tensor,
) -> Result<(Tensor, Tensor, Tensor)> {
    if upstream.rank() != 2 {
        return Err(CoreError::ShapeMismatch(format!(
            "dense_backward expects rank-2 upstream, got {:?}",
            upstream.shape()
        )));
    }
    let (n, f_in) = (saved_input.dim(0), saved_input.dim(1));
    let f_out = weights.dim(0);
    if upstream.dim(0) != n || upstream.dim(1) != f_out || weights.dim(1) != f_in {
        return Err(CoreError::ShapeMismatch(format!(
            "dense_backward dims disagree: upstream {:?}, input {:?}, weights {:?}",
            upstream.shape(),
            saved_input.shape(),
            weights.shape()
        )));
    }

    let mut grad_input = Tensor::zeros(&[n, f_in]);
    unsafe {
        matrixmultiply::sgemm(
            n,
            f_out,
            f_in,
            1.0,
            upstream.data().as_ptr(),
            f_out as isize,
            1,
            weights.data().as_ptr(),
            f_in as isize,
            1,
            0.0,
            grad_input.data_mut().as_mut_ptr(),
            f_in as isize,
            1,
        );
    }

    let mut grad_weights = Tensor::zeros(&[f_out, f_in]);
    unsafe {
        matrixmultiply::sgemm(
            f_out,
            n,
            f_in,
            1.0,
            // upstream transposed via strides.
            upstream.data().as_ptr(),
            1,
            f_out as isize,
            saved_input.data().as_ptr(),
            f_in as isize,
            1,
            0.0,
            grad_weights.data_mut().as_mut_ptr(),
            f_in as isize,
            1,
        );
    }

    let mut grad_bias = Tensor::zeros(&[f_out]);
    for j in 0..f_out {
        let mut acc = 0.0f64;
        for i in 0..n {
            acc += f64::from(upstream.data()[i * f_out + j]);
        }
        grad_bias.data_mut()[j] = acc as f32;
    }

    grad_input.ensure_finite("dense_backward grad_input")?;
    grad_weights.ensure_finite("dense_backward grad_weights")?;
    Ok((grad_input, grad_weights, grad_bias))
}
