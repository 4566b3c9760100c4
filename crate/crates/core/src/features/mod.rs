//! The canonical 121-feature vector per cell: 41 shape, 18 color and 62
//! texture features, in a fixed order that doubles as the CSV column
//! contract.

mod color;
mod shape;
mod texture;

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::CoreError;
use crate::imaging::CellContour;
use crate::Result;

pub use color::{color_features, rgb_to_hsv, rgb_to_lab, COLOR_FEATURE_COUNT};
pub use shape::{shape_features, SHAPE_FEATURE_COUNT};
pub use texture::{
    glcm, glcm_features, histogram_features, quantize_gray, Glcm, GlcmConfig,
    TEXTURE_FEATURE_COUNT,
};

/// Total number of features.
pub const FEATURE_COUNT: usize = SHAPE_FEATURE_COUNT + COLOR_FEATURE_COUNT + TEXTURE_FEATURE_COUNT;

/// Feature group tags.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureGroup {
    Shape,
    Color,
    Texture,
}

/// The ordered catalog of canonical feature names. The order is fixed for
/// the life of the artifact; CSV columns, model inputs and importance
/// rankings all refer to it.
#[derive(Debug)]
pub struct FeatureCatalog {
    names: Vec<String>,
    groups: Vec<FeatureGroup>,
}

impl FeatureCatalog {
    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn group_of(&self, name: &str) -> Option<FeatureGroup> {
        self.names.iter().position(|n| n == name).map(|i| self.groups[i])
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }
}

/// Returns the shared catalog instance.
pub fn catalog() -> &'static FeatureCatalog {
    static CATALOG: OnceLock<FeatureCatalog> = OnceLock::new();
    CATALOG.get_or_init(build_catalog)
}

fn build_catalog() -> FeatureCatalog {
    let mut names: Vec<String> = Vec::with_capacity(FEATURE_COUNT);
    let mut groups = Vec::with_capacity(FEATURE_COUNT);

    for n in shape::SHAPE_FEATURE_NAMES {
        names.push(n.to_string());
        groups.push(FeatureGroup::Shape);
    }
    for channel in ["Red", "Green", "Blue", "Hue", "Saturation", "Value", "L", "a", "b"] {
        names.push(format!("{channel} mean"));
        groups.push(FeatureGroup::Color);
        names.push(format!("{channel} std"));
        groups.push(FeatureGroup::Color);
    }
    names.push("Skewness".to_string());
    groups.push(FeatureGroup::Texture);
    names.push("Kurtosis".to_string());
    groups.push(FeatureGroup::Texture);
    for feature in ["Contrast", "Dissimilarity", "Homogeneity", "Energy", "Correlation"] {
        for cfg in 1..=texture::GLCM_CONFIGS.len() {
            names.push(format!("{feature}{cfg}"));
            groups.push(FeatureGroup::Texture);
        }
    }

    debug_assert_eq!(names.len(), FEATURE_COUNT);
    FeatureCatalog { names, groups }
}

/// Ordered 121-value record, positionally aligned with the catalog.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    values: Vec<f64>,
}

impl FeatureVector {
    fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() != FEATURE_COUNT {
            return Err(CoreError::Data(format!(
                "feature vector has {} values, expected {FEATURE_COUNT}",
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(CoreError::Data(format!("non-finite feature value {v}")));
        }
        Ok(FeatureVector { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        catalog().index_of(name).map(|i| self.values[i])
    }
}

/// Number of quantized gray tones used for the co-occurrence matrices.
pub const DEFAULT_GLCM_LEVELS: usize = 8;

/// Computes the full feature vector of one segmented cell: 41 shape values,
/// 18 color values, then 2 histogram and 60 co-occurrence texture values.
pub fn extract_all(cell: &CellContour) -> Result<FeatureVector> {
    extract_all_with_levels(cell, DEFAULT_GLCM_LEVELS)
}

/// [`extract_all`] with a configurable gray-tone count.
pub fn extract_all_with_levels(cell: &CellContour, levels: usize) -> Result<FeatureVector> {
    let mut values = Vec::with_capacity(FEATURE_COUNT);
    values.extend_from_slice(&shape_features(cell)?);
    values.extend_from_slice(&color_features(cell)?);
    values.extend_from_slice(&texture::texture_features(cell, levels)?);
    FeatureVector::new(values)
}
