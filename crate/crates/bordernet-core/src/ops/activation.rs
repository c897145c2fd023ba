//! ReLU activation. The subgradient at exactly zero is taken as zero.

use crate::error::Result;
use crate::tensor::Tensor;

pub fn relu_forward(input: &Tensor) -> Result<Tensor> {
    let out = Tensor::from_vec(input.shape(), input.iter().map(|&v| v.max(0.0)).collect())?;
    out.ensure_finite("relu_forward")?;
    Ok(out)
}

/// Pass `upstream` through where the saved input was strictly positive.
pub fn relu_backward(upstream: &Tensor, saved_input: &Tensor) -> Result<Tensor> {
    debug_assert_eq!(upstream.shape(), saved_input.shape());
    Tensor::from_vec(
        upstream.shape(),
        upstream
            .iter()
            .zip(saved_input.iter())
            .map(|(&g, &x)| if x > 0.0 { g } else { 0.0 })
            .collect(),
    )
}
