//! Core engine for the occlusion-robustness benchmark: a compact CNN
//! training stack (tensors, conv/pool/dense/ReLU/softmax with analytic
//! gradients, ADAM), the three LeNet-5 variants (vanilla, oriented-stripe
//! front filters, random-filter control), deterministic diagonal-stripe
//! occlusions, the gradient-based orientation-map operator, MNIST IDX
//! ingestion, and the artifact formats (checkpoints, accuracy-grid CSVs,
//! PGM/PPM images).
//!
//! Everything is seeded and bit-reproducible: the same configuration
//! produces byte-identical checkpoints and grid CSVs.

pub mod adam;
pub mod checkpoint;
pub mod error;
pub mod filter_bank;
pub mod grid;
pub mod imageio;
pub mod mnist;
pub mod models;
pub mod occlusion;
pub mod ops;
pub mod orientation;
pub mod rng;
pub mod tensor;
pub mod train;

pub use error::{CoreError, Result};
pub use tensor::Tensor;
