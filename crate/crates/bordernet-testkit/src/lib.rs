//! Test-only oracles and fixtures for the benchmark engine.
//!
//! Everything here is deliberately slow and obvious: convolution written
//! straight from its definition, gradients estimated by central finite
//! differences, occlusion counts derived from diagonal populations instead
//! of pixel scans. Production code must agree with these, never the other
//! way round.

pub mod convref;
pub mod fd;
pub mod fixtures;
pub mod occref;
