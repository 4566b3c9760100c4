//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by the segmentation, feature extraction and learning
/// pipeline.
#[derive(Debug, Error)]
pub enum CoreError {
    /// A caller-supplied parameter is outside its valid domain.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// An image does not satisfy the operation's preconditions.
    #[error("image error: {0}")]
    Image(String),

    /// Geometry too degenerate to process (zero area, collinear points, ...).
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    /// Dataset-level problem: shape mismatch, empty class, bad label, ...
    #[error("data error: {0}")]
    Data(String),

    /// A label outside the known class list.
    #[error("unknown label: {0:?}")]
    UnknownLabel(String),

    /// Feature names seen at predict time differ from those seen at fit time.
    #[error("feature mismatch: expected {expected:?}, got {got:?}")]
    FeatureMismatch { expected: Vec<String>, got: Vec<String> },

    /// Model fitting or prediction failed.
    #[error("model error: {0}")]
    Model(String),

    /// Hyperparameter search failed; carries per-trial diagnostics.
    #[error("search error: {0}")]
    Search(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("image codec error: {0}")]
    Codec(#[from] image::ImageError),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}
