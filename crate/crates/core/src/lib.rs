//! Batch toolkit for red blood cell morphology analysis from peripheral
//! blood smear micrographs.
//!
//! The pipeline has three stages, mirrored by the module layout:
//!
//! 1. [`imaging`] — segment micrographs into single-cell contours, masks and
//!    ROI crops, including the splitting of overlapping-cell clusters.
//! 2. [`features`] — compute the canonical 121-value feature vector per cell
//!    (41 shape, 18 color, 62 texture features).
//! 3. [`data`], [`models`], [`search`], [`selection`], [`metrics`] — dataset
//!    handling, seven classifier families plus rule-based baselines, CV-driven
//!    hyperparameter search, feature selection/reduction, and imbalance-aware
//!    evaluation.
//!
//! Everything is deterministic given a seed: fixed inputs produce
//! byte-identical outputs.

pub mod data;
pub mod error;
pub mod features;
pub mod imaging;
pub mod metrics;
pub mod models;
pub mod search;
pub mod selection;

pub use data::{Class, Dataset, ScalerStats};
pub use error::CoreError;
pub use features::{FeatureCatalog, FeatureVector};
pub use imaging::{BinaryImage, CellContour, GrayImage, RgbImage};
pub use metrics::{ConfusionMatrix, MetricReport};
pub use models::{ModelSpec, TrainedModel};

/// Result alias used across the crate.
pub type Result<T> = std::result::Result<T, CoreError>;

/// Version tag of the feature catalog / file formats, embedded in reports.
pub const CATALOG_VERSION: &str = "1";
