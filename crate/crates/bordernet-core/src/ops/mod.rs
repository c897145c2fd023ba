//! Differentiable layer operations.
//!
//! Every operation is a pure function of its inputs: forward passes return
//! the output plus whatever the matching backward pass needs, and backward
//! passes return exact analytic adjoints. Stride is fixed at 1 and padding is
//! zero-fill throughout.

mod activation;
mod conv;
mod dense;
mod loss;
mod pool;

pub use activation::{relu_backward, relu_forward};
pub use conv::{conv2d_backward, conv2d_forward};
pub use dense::{dense_backward, dense_forward};
pub use loss::softmax_cross_entropy;
pub use pool::{maxpool2x2_backward, maxpool2x2_forward};
