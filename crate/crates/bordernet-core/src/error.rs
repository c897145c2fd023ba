//! Error types shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CoreError {
    /// Tensor shape disagreement, with a description of what was expected.
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// IDX container carried an unexpected magic number.
    #[error("bad IDX magic: expected {expected:#010x}, found {found:#010x}")]
    BadIdxMagic { expected: u32, found: u32 },

    /// Image and label files disagree on the number of items.
    #[error("IDX count mismatch: {images} images vs {labels} labels")]
    IdxCountMismatch { images: usize, labels: usize },

    /// File ended before the declared payload was read.
    #[error("truncated file: {0}")]
    Truncated(String),

    #[error("bad checkpoint magic (not a BNET file)")]
    BadCheckpointMagic,

    #[error("unsupported checkpoint version {found} (supported: {supported})")]
    VersionMismatch { found: u32, supported: u32 },

    #[error("checkpoint holds variant {found}, expected {expected}")]
    VariantMismatch { expected: String, found: String },

    /// Declared tensor dimensions overflow or exceed the sanity limit.
    #[error("checkpoint dimension overflow: {0}")]
    DimensionOverflow(String),

    #[error("malformed checkpoint: {0}")]
    CheckpointFormat(String),

    /// A kernel with zero L1 mass cannot be normalized.
    #[error("degenerate filter: kernel has zero L1 norm")]
    DegenerateFilter,

    /// The training entry point only accepts the clean training split.
    #[error("refusing to train on {0} data; training uses the clean training split only")]
    RefusedTrainingData(String),

    #[error("class label {label} out of range [0, {classes})")]
    LabelOutOfRange { label: usize, classes: usize },

    #[error("non-finite value produced in {0}")]
    NonFinite(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("CSV parse error in {path}: {message}")]
    CsvParse { path: String, message: String },

    #[error("image decode error on {path}: {message}")]
    ImageDecode { path: String, message: String },
}

impl CoreError {
    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        CoreError::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, CoreError>;
