//! Experiment configuration: JSON file with CLI overrides. Every referenced
//! path is checked at load time and the resolved config is hashed into every
//! report for exact reruns.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use rbc_core::metrics::Scorer;
use rbc_core::models::Family;
use rbc_core::{CoreError, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Feature CSV consumed by the experiment.
    pub input_csv: PathBuf,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_scorer")]
    pub scorer: Scorer,
    /// Classifier families evaluated; all seven when omitted.
    #[serde(default = "default_families")]
    pub families: Vec<Family>,
    #[serde(default = "default_search_mode")]
    pub search_mode: SearchMode,
    /// Randomized-search iteration budget.
    #[serde(default = "default_n_iter")]
    pub n_iter: usize,
    #[serde(default = "default_folds")]
    pub cv_folds: usize,
    #[serde(default = "default_train_fraction")]
    pub train_fraction: f64,
    /// Optional fixed feature subset (names), e.g. a wrapper result.
    #[serde(default)]
    pub feature_subset: Option<Vec<String>>,
    /// Importance ranking driving experiment 2.
    #[serde(default = "default_ranking")]
    pub ranking: RankingSource,
    /// Families evaluated along the wrapper curve in experiment 2.
    #[serde(default = "default_wrapper_families")]
    pub wrapper_families: Vec<Family>,
    /// Also score the selected subset on every family (slow; experiment 2).
    #[serde(default)]
    pub full_comparison: bool,
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchMode {
    Randomized,
    Grid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RankingSource {
    Rf,
    Gb,
}

fn default_seed() -> u64 {
    42
}
fn default_scorer() -> Scorer {
    Scorer::Sds
}
fn default_families() -> Vec<Family> {
    Family::LEARNED.to_vec()
}
fn default_search_mode() -> SearchMode {
    SearchMode::Randomized
}
fn default_n_iter() -> usize {
    50
}
fn default_folds() -> usize {
    10
}
fn default_train_fraction() -> f64 {
    0.7
}
fn default_ranking() -> RankingSource {
    RankingSource::Rf
}
fn default_wrapper_families() -> Vec<Family> {
    vec![Family::RandomForest, Family::Cart]
}

/// Loads a config file and applies CLI overrides.
pub fn load(path: &Path, seed: Option<u64>, out: Option<PathBuf>) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CoreError::Data(format!("config {}: {e}", path.display())))?;
    let mut config: ExperimentConfig = serde_json::from_str(&text)
        .map_err(|e| CoreError::InvalidParameter(format!("config {}: {e}", path.display())))?;
    if let Some(seed) = seed {
        config.seed = seed;
    }
    if let Some(out) = out {
        config.out_dir = out;
    }
    config.validate()?;
    Ok(config)
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.input_csv.exists() {
            return Err(CoreError::Data(format!(
                "input CSV {} does not exist",
                self.input_csv.display()
            )));
        }
        if !(0.0 < self.train_fraction && self.train_fraction < 1.0) {
            return Err(CoreError::InvalidParameter(
                "train_fraction must be in (0, 1)".into(),
            ));
        }
        if self.cv_folds < 2 {
            return Err(CoreError::InvalidParameter("cv_folds must be >= 2".into()));
        }
        if self.n_iter == 0 {
            return Err(CoreError::InvalidParameter("n_iter must be >= 1".into()));
        }
        if self.families.is_empty() {
            return Err(CoreError::InvalidParameter("families must be non-empty".into()));
        }
        Ok(())
    }

    /// Canonical JSON of the resolved config; hashed into reports. The
    /// output directory does not affect results, so it is excluded and two
    /// runs into different directories hash identically.
    pub fn canonical_json(&self) -> String {
        let mut value = serde_json::to_value(self).expect("config serializes");
        if let Some(obj) = value.as_object_mut() {
            obj.remove("out_dir");
        }
        serde_json::to_string(&value).expect("config value serializes")
    }
}
