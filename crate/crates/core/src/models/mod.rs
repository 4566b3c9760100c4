//! The seven classifier families plus the three rule-based baselines, behind
//! one fit/predict contract. Fitting is deterministic given (spec, seed,
//! data); trained models are immutable and serialize to self-describing JSON.

mod boosting;
mod forest;
mod knn;
mod mlp;
mod rules;
mod svm;
mod tree;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::data::{Class, Dataset};
use crate::error::CoreError;
use crate::metrics::Scorer;
use crate::Result;

pub use boosting::{feature_importance as gb_feature_importance, GbFitted};
pub use forest::{feature_importance as forest_feature_importance, ForestFitted};
pub use knn::KnnFitted;
pub use mlp::{gradient_check, MlpFitted};
pub use rules::{AsakuraFitted, ThresholdFitted};
pub use svm::{alphas_within_box, max_kkt_residual, SvmFitted, SvmPairFitted};
pub use tree::{Tree, TreeFitted};

/// Current model file format version.
pub const MODEL_FORMAT_VERSION: u32 = 1;

/// Classifier family tags.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    SvmRbf,
    Cart,
    RandomForest,
    ExtraTrees,
    GradientBoosting,
    Knn,
    Mlp,
    Asakura,
    CircularityRule,
    EccentricityRule,
}

impl Family {
    /// The seven learned classifier families, in presentation order.
    pub const LEARNED: [Family; 7] = [
        Family::SvmRbf,
        Family::Cart,
        Family::RandomForest,
        Family::ExtraTrees,
        Family::GradientBoosting,
        Family::Knn,
        Family::Mlp,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Family::SvmRbf => "svm_rbf",
            Family::Cart => "cart",
            Family::RandomForest => "random_forest",
            Family::ExtraTrees => "extra_trees",
            Family::GradientBoosting => "gradient_boosting",
            Family::Knn => "knn",
            Family::Mlp => "mlp",
            Family::Asakura => "asakura",
            Family::CircularityRule => "circularity_rule",
            Family::EccentricityRule => "eccentricity_rule",
        }
    }

    /// Families whose inputs must be standard-scaled by the pipeline.
    pub fn needs_scaling(self) -> bool {
        matches!(self, Family::SvmRbf | Family::Knn | Family::Mlp)
    }
}

impl std::str::FromStr for Family {
    type Err = CoreError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "svm_rbf" | "svm" => Ok(Family::SvmRbf),
            "cart" | "dt" => Ok(Family::Cart),
            "random_forest" | "rf" => Ok(Family::RandomForest),
            "extra_trees" | "et" => Ok(Family::ExtraTrees),
            "gradient_boosting" | "gb" => Ok(Family::GradientBoosting),
            "knn" => Ok(Family::Knn),
            "mlp" => Ok(Family::Mlp),
            "asakura" => Ok(Family::Asakura),
            "circularity_rule" => Ok(Family::CircularityRule),
            "eccentricity_rule" => Ok(Family::EccentricityRule),
            other => Err(CoreError::InvalidParameter(format!("unknown family {other:?}"))),
        }
    }
}

/// Per-split feature subsampling policy for tree growers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaxFeatures {
    /// Consider every feature at every split.
    All,
    /// `floor(sqrt(d))`, at least 1.
    Sqrt,
    /// Fixed count, capped at d.
    Count(usize),
}

impl MaxFeatures {
    pub fn resolve(self, d: usize) -> usize {
        match self {
            MaxFeatures::All => d,
            MaxFeatures::Sqrt => ((d as f64).sqrt().floor() as usize).clamp(1, d),
            MaxFeatures::Count(n) => n.clamp(1, d),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnParams {
    pub neighbor_count: usize,
    pub weights: KnnWeights,
    /// Minkowski exponent; 1 is Manhattan, 2 Euclidean.
    pub minkowski_p: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KnnWeights {
    Uniform,
    Distance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CartParams {
    pub max_depth: Option<usize>,
    pub min_samples_leaf: usize,
    pub min_samples_split: usize,
    pub max_features: MaxFeatures,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub tree_count: usize,
    pub max_depth: Option<usize>,
    pub min_samples_leaf: usize,
    pub min_samples_split: usize,
    pub max_features: MaxFeatures,
    pub bootstrap: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbParams {
    pub stage_count: usize,
    pub learning_rate: f64,
    pub max_depth: usize,
    /// Row fraction drawn (without replacement) per stage.
    pub subsample: f64,
    /// Minimum summed hessian weight in a leaf for its update to apply.
    pub min_child_weight: f64,
    /// Per-leaf update clamp; 0 disables clamping.
    pub max_delta_step: f64,
    pub min_samples_leaf: usize,
    pub min_samples_split: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GammaSpec {
    Fixed(f64),
    /// `1 / d`, the usual choice for standardized features.
    Scale,
}

impl GammaSpec {
    pub fn resolve(self, d: usize) -> f64 {
        match self {
            GammaSpec::Fixed(g) => g,
            GammaSpec::Scale => 1.0 / d.max(1) as f64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmParams {
    pub c: f64,
    pub gamma: GammaSpec,
    /// KKT tolerance for the SMO stopping rule.
    pub tol: f64,
    /// Cap on full optimization passes.
    pub max_passes: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Identity,
    Relu,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpParams {
    pub hidden: Vec<usize>,
    pub activation: Activation,
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsakuraParams {
    /// Cells with eccentricity below this are elongated; calibrated on the
    /// training data when absent.
    pub esf_threshold: Option<f64>,
    /// Cells whose area or perimeter deviates from the normal-class median
    /// by more than this many IQRs are "other"; calibrated when absent.
    pub deviation_threshold: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleParams {
    /// Decision threshold on the scalar feature; calibrated on the training
    /// data when absent.
    pub threshold: Option<f64>,
}

/// Family-specific hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum FamilyParams {
    SvmRbf(SvmParams),
    Cart(CartParams),
    RandomForest(ForestParams),
    ExtraTrees(ForestParams),
    GradientBoosting(GbParams),
    Knn(KnnParams),
    Mlp(MlpParams),
    Asakura(AsakuraParams),
    CircularityRule(RuleParams),
    EccentricityRule(RuleParams),
}

impl FamilyParams {
    pub fn family(&self) -> Family {
        match self {
            FamilyParams::SvmRbf(_) => Family::SvmRbf,
            FamilyParams::Cart(_) => Family::Cart,
            FamilyParams::RandomForest(_) => Family::RandomForest,
            FamilyParams::ExtraTrees(_) => Family::ExtraTrees,
            FamilyParams::GradientBoosting(_) => Family::GradientBoosting,
            FamilyParams::Knn(_) => Family::Knn,
            FamilyParams::Mlp(_) => Family::Mlp,
            FamilyParams::Asakura(_) => Family::Asakura,
            FamilyParams::CircularityRule(_) => Family::CircularityRule,
            FamilyParams::EccentricityRule(_) => Family::EccentricityRule,
        }
    }
}

/// A classifier family with hyperparameters and a seed: everything needed to
/// fit reproducibly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub params: FamilyParams,
    pub seed: u64,
}

impl ModelSpec {
    pub fn family(&self) -> Family {
        self.params.family()
    }

    /// Validates hyperparameter domains.
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(CoreError::InvalidParameter(msg));
        match &self.params {
            FamilyParams::Knn(p) => {
                if p.neighbor_count < 1 {
                    return fail("knn neighbor_count must be >= 1".into());
                }
                if !(p.minkowski_p > 0.0) {
                    return fail(format!("knn p must be > 0, got {}", p.minkowski_p));
                }
            }
            FamilyParams::Cart(p) => {
                if p.min_samples_leaf < 1 || p.min_samples_split < 2 {
                    return fail("cart needs min_samples_leaf >= 1, min_samples_split >= 2".into());
                }
            }
            FamilyParams::RandomForest(p) | FamilyParams::ExtraTrees(p) => {
                if p.tree_count < 1 {
                    return fail("tree_count must be >= 1".into());
                }
                if p.min_samples_leaf < 1 || p.min_samples_split < 2 {
                    return fail("needs min_samples_leaf >= 1, min_samples_split >= 2".into());
                }
            }
            FamilyParams::GradientBoosting(p) => {
                if p.stage_count < 1 {
                    return fail("stage_count must be >= 1".into());
                }
                if !(p.learning_rate > 0.0) {
                    return fail("learning_rate must be > 0".into());
                }
                if !(0.0 < p.subsample && p.subsample <= 1.0) {
                    return fail("subsample must be in (0, 1]".into());
                }
                if p.max_depth < 1 {
                    return fail("max_depth must be >= 1".into());
                }
            }
            FamilyParams::SvmRbf(p) => {
                if !(p.c > 0.0) {
                    return fail("svm C must be > 0".into());
                }
                if let GammaSpec::Fixed(g) = p.gamma {
                    if !(g > 0.0) {
                        return fail("svm gamma must be > 0".into());
                    }
                }
            }
            FamilyParams::Mlp(p) => {
                if p.hidden.iter().any(|&h| h == 0) {
                    return fail("mlp hidden sizes must be positive".into());
                }
                if !(p.learning_rate > 0.0) || p.epochs == 0 || p.batch_size == 0 {
                    return fail("mlp learning_rate, epochs, batch_size must be positive".into());
                }
            }
            FamilyParams::Asakura(p) => {
                if let Some(t) = p.esf_threshold {
                    if !t.is_finite() {
                        return fail("asakura esf_threshold must be finite".into());
                    }
                }
            }
            FamilyParams::CircularityRule(p) | FamilyParams::EccentricityRule(p) => {
                if let Some(t) = p.threshold {
                    if !t.is_finite() {
                        return fail("rule threshold must be finite".into());
                    }
                }
            }
        }
        Ok(())
    }

    /// Fine-tuned parameter presets, per scorer. The two scorers share every
    /// preset except the boosting update clamp and the neighbor count.
    pub fn paper_preset(family: Family, scorer: Scorer, seed: u64) -> ModelSpec {
        let params = match family {
            Family::SvmRbf => FamilyParams::SvmRbf(SvmParams {
                c: 10.0,
                gamma: GammaSpec::Fixed(0.01),
                tol: 1e-3,
                max_passes: 10_000,
            }),
            Family::Cart => FamilyParams::Cart(CartParams {
                max_depth: None,
                min_samples_leaf: 10,
                min_samples_split: 10,
                max_features: MaxFeatures::All,
            }),
            Family::RandomForest => FamilyParams::RandomForest(ForestParams {
                tree_count: 300,
                max_depth: None,
                min_samples_leaf: 2,
                min_samples_split: 2,
                max_features: MaxFeatures::Sqrt,
                bootstrap: true,
            }),
            Family::ExtraTrees => FamilyParams::ExtraTrees(ForestParams {
                tree_count: 60,
                max_depth: None,
                min_samples_leaf: 1,
                min_samples_split: 10,
                max_features: MaxFeatures::Sqrt,
                bootstrap: true,
            }),
            Family::GradientBoosting => FamilyParams::GradientBoosting(GbParams {
                stage_count: 100,
                learning_rate: 0.1,
                max_depth: 10,
                subsample: 1.0,
                min_child_weight: 1.0,
                max_delta_step: match scorer {
                    Scorer::Sds => 10.0,
                    Scorer::FWeighted => 20.0,
                },
                min_samples_leaf: 1,
                min_samples_split: 2,
            }),
            Family::Knn => FamilyParams::Knn(KnnParams {
                neighbor_count: match scorer {
                    Scorer::Sds => 10,
                    Scorer::FWeighted => 9,
                },
                weights: KnnWeights::Distance,
                minkowski_p: 1.0,
            }),
            Family::Mlp => FamilyParams::Mlp(MlpParams {
                hidden: vec![10, 3],
                activation: Activation::Identity,
                learning_rate: 0.01,
                epochs: 500,
                batch_size: 32,
            }),
            Family::Asakura => FamilyParams::Asakura(AsakuraParams {
                esf_threshold: None,
                deviation_threshold: None,
            }),
            Family::CircularityRule => {
                FamilyParams::CircularityRule(RuleParams { threshold: None })
            }
            Family::EccentricityRule => {
                FamilyParams::EccentricityRule(RuleParams { threshold: None })
            }
        };
        ModelSpec { params, seed }
    }

    /// Library-style defaults used as the untuned baseline.
    pub fn baseline_preset(family: Family, seed: u64) -> ModelSpec {
        let params = match family {
            Family::SvmRbf => FamilyParams::SvmRbf(SvmParams {
                c: 1.0,
                gamma: GammaSpec::Scale,
                tol: 1e-3,
                max_passes: 10_000,
            }),
            Family::Cart => FamilyParams::Cart(CartParams {
                max_depth: None,
                min_samples_leaf: 1,
                min_samples_split: 2,
                max_features: MaxFeatures::All,
            }),
            Family::RandomForest => FamilyParams::RandomForest(ForestParams {
                tree_count: 100,
                max_depth: None,
                min_samples_leaf: 1,
                min_samples_split: 2,
                max_features: MaxFeatures::Sqrt,
                bootstrap: true,
            }),
            Family::ExtraTrees => FamilyParams::ExtraTrees(ForestParams {
                tree_count: 100,
                max_depth: None,
                min_samples_leaf: 1,
                min_samples_split: 2,
                max_features: MaxFeatures::Sqrt,
                bootstrap: false,
            }),
            Family::GradientBoosting => FamilyParams::GradientBoosting(GbParams {
                stage_count: 100,
                learning_rate: 0.1,
                max_depth: 3,
                subsample: 1.0,
                min_child_weight: 0.0,
                max_delta_step: 0.0,
                min_samples_leaf: 1,
                min_samples_split: 2,
            }),
            Family::Knn => FamilyParams::Knn(KnnParams {
                neighbor_count: 5,
                weights: KnnWeights::Uniform,
                minkowski_p: 2.0,
            }),
            Family::Mlp => FamilyParams::Mlp(MlpParams {
                hidden: vec![100],
                activation: Activation::Relu,
                learning_rate: 0.01,
                epochs: 200,
                batch_size: 32,
            }),
            other => return Self::paper_preset(other, Scorer::Sds, seed),
        };
        ModelSpec { params, seed }
    }
}

/// Fitted parameters per family.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Fitted {
    Knn(KnnFitted),
    Tree(TreeFitted),
    Forest(ForestFitted),
    Boosting(GbFitted),
    Svm(SvmFitted),
    Mlp(MlpFitted),
    Asakura(AsakuraFitted),
    Threshold(ThresholdFitted),
}

/// An immutable fitted classifier; predicts only over the feature names it
/// was fitted with.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainedModel {
    pub version: u32,
    pub spec: ModelSpec,
    pub classes: Vec<Class>,
    pub feature_names: Vec<String>,
    pub fitted: Fitted,
}

/// Fits `spec` on the training dataset.
pub fn fit(spec: &ModelSpec, train: &Dataset) -> Result<TrainedModel> {
    spec.validate()?;
    if train.n_samples() == 0 {
        return Err(CoreError::Data("empty training set".into()));
    }
    let classes = train.classes();
    if classes.len() < 2 {
        return Err(CoreError::Data("training data needs at least two classes".into()));
    }
    let y: Vec<usize> = train
        .y()
        .iter()
        .map(|c| classes.iter().position(|k| k == c).expect("class list covers labels"))
        .collect();
    let x = train.x();

    let fitted = match &spec.params {
        FamilyParams::Knn(p) => Fitted::Knn(knn::fit(p, x, &y, classes.len())?),
        FamilyParams::Cart(p) => Fitted::Tree(tree::fit_cart(p, x, &y, classes.len())?),
        FamilyParams::RandomForest(p) => {
            Fitted::Forest(forest::fit(p, x, &y, classes.len(), false, spec.seed)?)
        }
        FamilyParams::ExtraTrees(p) => {
            Fitted::Forest(forest::fit(p, x, &y, classes.len(), true, spec.seed)?)
        }
        FamilyParams::GradientBoosting(p) => {
            Fitted::Boosting(boosting::fit(p, x, &y, classes.len(), spec.seed)?)
        }
        FamilyParams::SvmRbf(p) => Fitted::Svm(svm::fit(p, x, &y, classes.len())?),
        FamilyParams::Mlp(p) => Fitted::Mlp(mlp::fit(p, x, &y, classes.len(), spec.seed)?),
        FamilyParams::Asakura(p) => {
            Fitted::Asakura(rules::fit_asakura(p, train, &classes)?)
        }
        FamilyParams::CircularityRule(p) => Fitted::Threshold(rules::fit_threshold_rule(
            p,
            train,
            &classes,
            "Circularity",
        )?),
        FamilyParams::EccentricityRule(p) => Fitted::Threshold(rules::fit_threshold_rule(
            p,
            train,
            &classes,
            "Eccentricity",
        )?),
    };

    Ok(TrainedModel {
        version: MODEL_FORMAT_VERSION,
        spec: spec.clone(),
        classes,
        feature_names: train.feature_names().to_vec(),
        fitted,
    })
}

impl TrainedModel {
    /// Predicts one label per row. The feature names must match those seen
    /// at fit time, in order.
    pub fn predict(&self, x: &Array2<f64>, feature_names: &[String]) -> Result<Vec<Class>> {
        if feature_names != self.feature_names.as_slice() {
            return Err(CoreError::FeatureMismatch {
                expected: self.feature_names.clone(),
                got: feature_names.to_vec(),
            });
        }
        if x.ncols() != self.feature_names.len() {
            return Err(CoreError::Data(format!(
                "input has {} columns, model expects {}",
                x.ncols(),
                self.feature_names.len()
            )));
        }
        let indices = match &self.fitted {
            Fitted::Knn(f) => knn::predict(f, x),
            Fitted::Tree(f) => tree::predict(f, x),
            Fitted::Forest(f) => forest::predict(f, x),
            Fitted::Boosting(f) => boosting::predict(f, x),
            Fitted::Svm(f) => svm::predict(f, x),
            Fitted::Mlp(f) => mlp::predict(f, x),
            Fitted::Asakura(f) => rules::predict_asakura(f, x),
            Fitted::Threshold(f) => rules::predict_threshold(f, x),
        };
        Ok(indices.into_iter().map(|i| self.classes[i]).collect())
    }

    /// Convenience wrapper for predicting on a [`Dataset`].
    pub fn predict_dataset(&self, ds: &Dataset) -> Result<Vec<Class>> {
        self.predict(ds.x(), ds.feature_names())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(json: &str) -> Result<TrainedModel> {
        let model: TrainedModel = serde_json::from_str(json)?;
        if model.version != MODEL_FORMAT_VERSION {
            return Err(CoreError::Model(format!(
                "unsupported model format version {}",
                model.version
            )));
        }
        Ok(model)
    }
}

/// Dense matrix payload for serialized models.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixData {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl MatrixData {
    pub fn from_array(a: &Array2<f64>) -> Self {
        MatrixData {
            rows: a.nrows(),
            cols: a.ncols(),
            data: a.iter().copied().collect(),
        }
    }

    pub fn to_array(&self) -> Array2<f64> {
        Array2::from_shape_vec((self.rows, self.cols), self.data.clone())
            .expect("stored shape matches data length")
    }
}


#[cfg(test)]
mod tests {
    use super::test_support::{accuracy, blobs};
    use super::*;
    use crate::data::split_train_test;

    #[test]
    fn spec_validation_rejects_bad_domains() {
        let bad = ModelSpec {
            params: FamilyParams::Knn(KnnParams {
                neighbor_count: 0,
                weights: KnnWeights::Uniform,
                minkowski_p: 2.0,
            }),
            seed: 0,
        };
        assert!(bad.validate().is_err());
        let bad = ModelSpec {
            params: FamilyParams::SvmRbf(SvmParams {
                c: -1.0,
                gamma: GammaSpec::Fixed(0.1),
                tol: 1e-3,
                max_passes: 10,
            }),
            seed: 0,
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn predict_rejects_feature_mismatch() {
        let ds = blobs(20, 0.3, 1);
        let spec = ModelSpec::paper_preset(Family::Cart, Scorer::Sds, 0);
        let model = fit(&spec, &ds).unwrap();
        let err = model.predict(ds.x(), &["other".into(), "names".into()]);
        assert!(matches!(err, Err(CoreError::FeatureMismatch { .. })));
    }

    #[test]
    fn model_json_round_trip() {
        let ds = blobs(15, 0.3, 2);
        let spec = ModelSpec::paper_preset(Family::Cart, Scorer::Sds, 7);
        let model = fit(&spec, &ds).unwrap();
        let json = model.to_json().unwrap();
        let loaded = TrainedModel::from_json(&json).unwrap();
        let a = model.predict_dataset(&ds).unwrap();
        let b = loaded.predict_dataset(&ds).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn every_learned_family_separates_blobs() {
        // 600 points, sigma small: every family should reach >= 95% test
        // accuracy with its fine-tuned preset
        let ds = blobs(200, 0.35, 42);
        let (train, test, _) = split_train_test(&ds, 0.7, 9).unwrap();
        for family in Family::LEARNED {
            let spec = ModelSpec::paper_preset(family, Scorer::Sds, 3);
            let model = fit(&spec, &train).unwrap();
            let pred = model.predict_dataset(&test).unwrap();
            let acc = accuracy(&pred, test.y());
            assert!(acc >= 0.95, "{} reached only {acc:.3}", family.as_str());
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let ds = blobs(40, 0.5, 5);
        for family in Family::LEARNED {
            let spec = ModelSpec::paper_preset(family, Scorer::Sds, 11);
            let m1 = fit(&spec, &ds).unwrap();
            let m2 = fit(&spec, &ds).unwrap();
            let p1 = m1.predict_dataset(&ds).unwrap();
            let p2 = m2.predict_dataset(&ds).unwrap();
            assert_eq!(p1, p2, "{} not deterministic", family.as_str());
        }
    }
}
