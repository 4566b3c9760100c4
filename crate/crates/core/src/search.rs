//! Hyperparameter search: randomized sampling and exhaustive grids, scored
//! by stratified 10-fold cross-validation on the training split. Scaling
//! statistics are fit inside each fold's training portion, never on the
//! fold's validation rows.

use ndarray::Axis;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{kfold, standard_scale_apply, standard_scale_fit, Dataset, ScalerStats};
use crate::error::CoreError;
use crate::metrics::Scorer;
use crate::models::{self, Family, FamilyParams, GammaSpec, KnnWeights, MaxFeatures, ModelSpec};
use crate::Result;

/// One hyperparameter's domain.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Domain {
    /// Finite list of values.
    Choice { values: Vec<ParamValue> },
    /// Inclusive integer range.
    IntRange { lo: i64, hi: i64 },
    /// Log-uniform continuous range (randomized search only).
    LogUniform { lo: f64, hi: f64 },
}

/// A sampled or enumerated hyperparameter value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamValue {
    Bool(bool),
    Int(i64),
    Float(f64),
    Str(String),
}

/// Search space: named domains over one classifier family.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ParamSpace {
    pub family: Family,
    pub dims: Vec<ParamDim>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ParamDim {
    pub name: String,
    pub domain: Domain,
}

impl ParamSpace {
    pub fn validate(&self) -> Result<()> {
        if self.dims.is_empty() {
            return Err(CoreError::Search("empty parameter space".into()));
        }
        for dim in &self.dims {
            match &dim.domain {
                Domain::Choice { values } if values.is_empty() => {
                    return Err(CoreError::Search(format!("dimension {:?} empty", dim.name)));
                }
                Domain::IntRange { lo, hi } if lo > hi => {
                    return Err(CoreError::Search(format!("dimension {:?} inverted", dim.name)));
                }
                Domain::LogUniform { lo, hi } if !(0.0 < *lo && lo <= hi) => {
                    return Err(CoreError::Search(format!(
                        "dimension {:?} needs 0 < lo <= hi",
                        dim.name
                    )));
                }
                _ => {}
            }
        }
        Ok(())
    }

    /// Number of grid points, or an error if a continuous dimension makes
    /// the space infinite.
    pub fn grid_size(&self) -> Result<usize> {
        let mut size = 1usize;
        for dim in &self.dims {
            let card = match &dim.domain {
                Domain::Choice { values } => values.len(),
                Domain::IntRange { lo, hi } => (hi - lo + 1) as usize,
                Domain::LogUniform { .. } => {
                    return Err(CoreError::Search(format!(
                        "dimension {:?} is continuous; grid search needs a finite space",
                        dim.name
                    )));
                }
            };
            size = size.saturating_mul(card);
        }
        Ok(size)
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> Vec<(String, ParamValue)> {
        self.dims
            .iter()
            .map(|dim| {
                let v = match &dim.domain {
                    Domain::Choice { values } => values[rng.random_range(0..values.len())].clone(),
                    Domain::IntRange { lo, hi } => ParamValue::Int(rng.random_range(*lo..=*hi)),
                    Domain::LogUniform { lo, hi } => {
                        let u = rng.random_range(lo.ln()..=hi.ln());
                        ParamValue::Float(u.exp())
                    }
                };
                (dim.name.clone(), v)
            })
            .collect()
    }

    /// Grid point by odometer index; the first dimension varies slowest.
    fn grid_point(&self, mut index: usize) -> Vec<(String, ParamValue)> {
        let cards: Vec<usize> = self
            .dims
            .iter()
            .map(|d| match &d.domain {
                Domain::Choice { values } => values.len(),
                Domain::IntRange { lo, hi } => (hi - lo + 1) as usize,
                Domain::LogUniform { .. } => unreachable!("validated finite"),
            })
            .collect();
        let mut out = Vec::with_capacity(self.dims.len());
        for (dim, &card) in self.dims.iter().zip(&cards).rev() {
            let pos = index % card;
            index /= card;
            let v = match &dim.domain {
                Domain::Choice { values } => values[pos].clone(),
                Domain::IntRange { lo, .. } => ParamValue::Int(lo + pos as i64),
                Domain::LogUniform { .. } => unreachable!(),
            };
            out.push((dim.name.clone(), v));
        }
        out.reverse();
        out
    }
}

fn as_f64(v: &ParamValue) -> Result<f64> {
    match v {
        ParamValue::Float(f) => Ok(*f),
        ParamValue::Int(i) => Ok(*i as f64),
        other => Err(CoreError::Search(format!("expected number, got {other:?}"))),
    }
}

fn as_usize(v: &ParamValue) -> Result<usize> {
    match v {
        ParamValue::Int(i) if *i >= 0 => Ok(*i as usize),
        ParamValue::Float(f) if *f >= 0.0 && f.fract() == 0.0 => Ok(*f as usize),
        other => Err(CoreError::Search(format!("expected non-negative integer, got {other:?}"))),
    }
}

fn as_str(v: &ParamValue) -> Result<&str> {
    match v {
        ParamValue::Str(s) => Ok(s),
        other => Err(CoreError::Search(format!("expected string, got {other:?}"))),
    }
}

/// Applies one named hyperparameter to a spec. Names are the semantic field
/// names of [`FamilyParams`].
fn apply(spec: &mut ModelSpec, name: &str, value: &ParamValue) -> Result<()> {
    let family = spec.family();
    let unknown = move || {
        Err(CoreError::Search(format!(
            "unknown hyperparameter {name:?} for family {}",
            family.as_str()
        )))
    };
    match &mut spec.params {
        FamilyParams::SvmRbf(p) => match name {
            "c" => p.c = as_f64(value)?,
            "gamma" => p.gamma = GammaSpec::Fixed(as_f64(value)?),
            "tol" => p.tol = as_f64(value)?,
            _ => return unknown(),
        },
        FamilyParams::Cart(p) => match name {
            "max_depth" => {
                let d = as_usize(value)?;
                p.max_depth = if d == 0 { None } else { Some(d) };
            }
            "min_samples_leaf" => p.min_samples_leaf = as_usize(value)?,
            "min_samples_split" => p.min_samples_split = as_usize(value)?,
            _ => return unknown(),
        },
        FamilyParams::RandomForest(p) | FamilyParams::ExtraTrees(p) => match name {
            "tree_count" => p.tree_count = as_usize(value)?,
            "max_depth" => {
                let d = as_usize(value)?;
                p.max_depth = if d == 0 { None } else { Some(d) };
            }
            "min_samples_leaf" => p.min_samples_leaf = as_usize(value)?,
            "min_samples_split" => p.min_samples_split = as_usize(value)?,
            "max_features" => {
                p.max_features = match value {
                    ParamValue::Str(s) if s == "sqrt" => MaxFeatures::Sqrt,
                    ParamValue::Str(s) if s == "all" => MaxFeatures::All,
                    other => MaxFeatures::Count(as_usize(other)?),
                }
            }
            "bootstrap" => {
                p.bootstrap = match value {
                    ParamValue::Bool(b) => *b,
                    other => {
                        return Err(CoreError::Search(format!("expected bool, got {other:?}")))
                    }
                }
            }
            _ => return unknown(),
        },
        FamilyParams::GradientBoosting(p) => match name {
            "stage_count" => p.stage_count = as_usize(value)?,
            "learning_rate" => p.learning_rate = as_f64(value)?,
            "max_depth" => p.max_depth = as_usize(value)?,
            "subsample" => p.subsample = as_f64(value)?,
            "min_child_weight" => p.min_child_weight = as_f64(value)?,
            "max_delta_step" => p.max_delta_step = as_f64(value)?,
            _ => return unknown(),
        },
        FamilyParams::Knn(p) => match name {
            "neighbor_count" => p.neighbor_count = as_usize(value)?,
            "weights" => {
                p.weights = match as_str(value)? {
                    "uniform" => KnnWeights::Uniform,
                    "distance" => KnnWeights::Distance,
                    other => return Err(CoreError::Search(format!("unknown weights {other:?}"))),
                }
            }
            "minkowski_p" => p.minkowski_p = as_f64(value)?,
            _ => return unknown(),
        },
        FamilyParams::Mlp(p) => match name {
            "hidden" => {
                let parts: Result<Vec<usize>> = as_str(value)?
                    .split(',')
                    .map(|s| {
                        s.trim().parse::<usize>().map_err(|_| {
                            CoreError::Search(format!("bad hidden layout {value:?}"))
                        })
                    })
                    .collect();
                p.hidden = parts?;
            }
            "learning_rate" => p.learning_rate = as_f64(value)?,
            "epochs" => p.epochs = as_usize(value)?,
            "batch_size" => p.batch_size = as_usize(value)?,
            _ => return unknown(),
        },
        FamilyParams::Asakura(p) => match name {
            "esf_threshold" => p.esf_threshold = Some(as_f64(value)?),
            "deviation_threshold" => p.deviation_threshold = Some(as_f64(value)?),
            _ => return unknown(),
        },
        FamilyParams::CircularityRule(p) | FamilyParams::EccentricityRule(p) => match name {
            "threshold" => p.threshold = Some(as_f64(value)?),
            _ => return unknown(),
        },
    }
    Ok(())
}

fn realize(family: Family, assignment: &[(String, ParamValue)], seed: u64) -> Result<ModelSpec> {
    let mut spec = ModelSpec::paper_preset(family, Scorer::Sds, seed);
    for (name, value) in assignment {
        apply(&mut spec, name, value)?;
    }
    spec.validate()?;
    Ok(spec)
}

/// One evaluated configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Trial {
    pub spec: ModelSpec,
    pub fold_scores: Vec<f64>,
    pub mean: f64,
    pub std: f64,
    /// Present when the trial failed to fit; failed trials never win.
    pub error: Option<String>,
}

/// Search outcome: the best spec plus every trial for the report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SearchResult {
    pub best_spec: ModelSpec,
    pub best_cv_score: f64,
    pub trials: Vec<Trial>,
    pub scorer: Scorer,
    pub seed: u64,
}

/// Scales one fold: statistics from the fold's training rows only, applied
/// to both sides. Exposed so tests can assert the no-leakage contract
/// directly.
pub fn prepare_fold(
    train: &Dataset,
    train_idx: &[usize],
    valid_idx: &[usize],
) -> Result<(Dataset, Dataset, ScalerStats)> {
    let fold_train = train.subset(train_idx)?;
    let fold_valid = train.subset(valid_idx)?;
    let stats = standard_scale_fit(&fold_train)?;
    let scaled_train = fold_train.with_matrix(
        standard_scale_apply(&stats, fold_train.x())?,
        fold_train.feature_names().to_vec(),
    )?;
    let scaled_valid = fold_valid.with_matrix(
        standard_scale_apply(&stats, fold_valid.x())?,
        fold_valid.feature_names().to_vec(),
    )?;
    Ok((scaled_train, scaled_valid, stats))
}

/// Stratified k-fold scores of one spec on the training split. The model is
/// refit from scratch per fold; scaling is fit inside each fold.
pub fn cross_val_score(
    spec: &ModelSpec,
    train: &Dataset,
    k: usize,
    scorer: Scorer,
    seed: u64,
) -> Result<Vec<f64>> {
    let folds = kfold(train.n_samples(), k, seed, Some(train.y()))?;
    let classes = train.classes();
    let mut scores = Vec::with_capacity(k);
    for (fold_no, (train_idx, valid_idx)) in folds.iter().enumerate() {
        let (fold_train, fold_valid, _) = prepare_fold(train, train_idx, valid_idx)?;
        let model = models::fit(spec, &fold_train)
            .map_err(|e| CoreError::Search(format!("fold {fold_no}: {e}")))?;
        let pred = model
            .predict_dataset(&fold_valid)
            .map_err(|e| CoreError::Search(format!("fold {fold_no}: {e}")))?;
        scores.push(scorer.score(fold_valid.y(), &pred, &classes)?);
    }
    Ok(scores)
}

fn run_trials(
    assignments: Vec<Vec<(String, ParamValue)>>,
    family: Family,
    train: &Dataset,
    k: usize,
    scorer: Scorer,
    seed: u64,
) -> Result<SearchResult> {
    let trials: Vec<Trial> = assignments
        .into_par_iter()
        .map(|assignment| {
            let spec = match realize(family, &assignment, seed) {
                Ok(s) => s,
                Err(e) => {
                    return Trial {
                        spec: ModelSpec::paper_preset(family, scorer, seed),
                        fold_scores: Vec::new(),
                        mean: f64::NEG_INFINITY,
                        std: 0.0,
                        error: Some(e.to_string()),
                    }
                }
            };
            match cross_val_score(&spec, train, k, scorer, seed) {
                Ok(scores) => {
                    let mean = scores.iter().sum::<f64>() / scores.len() as f64;
                    let var = scores.iter().map(|s| (s - mean).powi(2)).sum::<f64>()
                        / scores.len() as f64;
                    Trial { spec, fold_scores: scores, mean, std: var.sqrt(), error: None }
                }
                Err(e) => Trial {
                    spec,
                    fold_scores: Vec::new(),
                    mean: f64::NEG_INFINITY,
                    std: 0.0,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();

    // argmax over trial means; ties keep the earlier trial
    let mut best: Option<usize> = None;
    for (i, t) in trials.iter().enumerate() {
        if t.error.is_none() && best.map_or(true, |b| t.mean > trials[b].mean) {
            best = Some(i);
        }
    }
    let Some(best) = best else {
        let diags: Vec<String> = trials
            .iter()
            .enumerate()
            .map(|(i, t)| format!("trial {i}: {}", t.error.as_deref().unwrap_or("?")))
            .collect();
        return Err(CoreError::Search(format!(
            "all {} trials failed: {}",
            trials.len(),
            diags.join("; ")
        )));
    };
    Ok(SearchResult {
        best_spec: trials[best].spec.clone(),
        best_cv_score: trials[best].mean,
        trials,
        scorer,
        seed,
    })
}

/// Samples `n_iter` configurations i.i.d. from the space and returns the
/// best by mean k-fold score.
pub fn randomized_search(
    space: &ParamSpace,
    train: &Dataset,
    n_iter: usize,
    k: usize,
    scorer: Scorer,
    seed: u64,
) -> Result<SearchResult> {
    if n_iter == 0 {
        return Err(CoreError::Search("n_iter must be >= 1".into()));
    }
    space.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let assignments: Vec<_> = (0..n_iter).map(|_| space.sample(&mut rng)).collect();
    run_trials(assignments, space.family, train, k, scorer, seed)
}

/// Evaluates every grid point exactly once; same scoring and tie contract
/// as [`randomized_search`].
pub fn grid_search(
    space: &ParamSpace,
    train: &Dataset,
    k: usize,
    scorer: Scorer,
    seed: u64,
) -> Result<SearchResult> {
    space.validate()?;
    let size = space.grid_size()?;
    let assignments: Vec<_> = (0..size).map(|i| space.grid_point(i)).collect();
    run_trials(assignments, space.family, train, k, scorer, seed)
}

/// Search spaces bracketing each family's fine-tuned preset.
pub fn default_space(family: Family) -> ParamSpace {
    let choice = |name: &str, values: Vec<ParamValue>| ParamDim {
        name: name.to_string(),
        domain: Domain::Choice { values },
    };
    let floats = |vs: &[f64]| vs.iter().map(|&v| ParamValue::Float(v)).collect::<Vec<_>>();
    let ints = |vs: &[i64]| vs.iter().map(|&v| ParamValue::Int(v)).collect::<Vec<_>>();
    let dims = match family {
        Family::SvmRbf => vec![
            choice("c", floats(&[0.1, 1.0, 10.0, 100.0])),
            choice("gamma", floats(&[0.001, 0.01, 0.1])),
        ],
        Family::Cart => vec![
            choice("min_samples_leaf", ints(&[1, 2, 5, 10])),
            choice("min_samples_split", ints(&[2, 5, 10])),
        ],
        Family::RandomForest => vec![
            choice("tree_count", ints(&[60, 100, 300])),
            choice("min_samples_leaf", ints(&[1, 2])),
            choice("min_samples_split", ints(&[2, 10])),
        ],
        Family::ExtraTrees => vec![
            choice("tree_count", ints(&[60, 100, 300])),
            choice("min_samples_leaf", ints(&[1, 2])),
            choice("min_samples_split", ints(&[2, 10])),
        ],
        Family::GradientBoosting => vec![
            choice("max_depth", ints(&[3, 5, 10])),
            choice("max_delta_step", floats(&[0.0, 10.0, 20.0])),
        ],
        Family::Knn => vec![
            ParamDim { name: "neighbor_count".into(), domain: Domain::IntRange { lo: 1, hi: 15 } },
            choice(
                "weights",
                vec![ParamValue::Str("uniform".into()), ParamValue::Str("distance".into())],
            ),
            choice("minkowski_p", floats(&[1.0, 2.0])),
        ],
        Family::Mlp => vec![
            choice(
                "hidden",
                vec![
                    ParamValue::Str("10,3".into()),
                    ParamValue::Str("50".into()),
                    ParamValue::Str("100".into()),
                ],
            ),
            choice("learning_rate", floats(&[0.001, 0.01, 0.1])),
        ],
        Family::Asakura => vec![choice("esf_threshold", floats(&[0.5, 0.6, 0.7]))],
        Family::CircularityRule | Family::EccentricityRule => {
            vec![choice("threshold", floats(&[0.5, 0.6, 0.7, 0.8, 0.9]))]
        }
    };
    ParamSpace { family, dims }
}

/// Column means of a matrix, shared by tests and reports.
pub fn matrix_column_means(x: &ndarray::Array2<f64>) -> Vec<f64> {
    x.mean_axis(Axis(0)).map(|m| m.to_vec()).unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{Class, Provenance};
    use crate::models::test_support::blobs;
    use ndarray::Array2;

    fn knn_space(lo: i64, hi: i64) -> ParamSpace {
        ParamSpace {
            family: Family::Knn,
            dims: vec![ParamDim {
                name: "neighbor_count".into(),
                domain: Domain::IntRange { lo, hi },
            }],
        }
    }

    #[test]
    fn single_point_space_returns_it() {
        let ds = blobs(20, 0.4, 1);
        let space = knn_space(3, 3);
        let r = randomized_search(&space, &ds, 1, 5, Scorer::Sds, 0).unwrap();
        assert_eq!(r.trials.len(), 1);
        if let FamilyParams::Knn(p) = &r.best_spec.params {
            assert_eq!(p.neighbor_count, 3);
        } else {
            panic!("wrong family");
        }
    }

    #[test]
    fn tie_break_keeps_earliest_trial() {
        // perfectly separable data: every k scores 1.0, so the winner must
        // be trial 0's spec
        let ds = blobs(30, 0.2, 2);
        let space = knn_space(1, 8);
        let r = randomized_search(&space, &ds, 10, 5, Scorer::Sds, 7).unwrap();
        assert!(r.trials.iter().all(|t| (t.mean - 1.0).abs() < 1e-12));
        assert_eq!(r.best_spec, r.trials[0].spec);
        assert_eq!(r.best_cv_score, 1.0);
    }

    #[test]
    fn grid_enumerates_cartesian_product() {
        let ds = blobs(20, 0.4, 3);
        let space = ParamSpace {
            family: Family::Cart,
            dims: vec![
                ParamDim {
                    name: "min_samples_leaf".into(),
                    domain: Domain::Choice {
                        values: vec![ParamValue::Int(1), ParamValue::Int(2)],
                    },
                },
                ParamDim {
                    name: "min_samples_split".into(),
                    domain: Domain::Choice {
                        values: vec![ParamValue::Int(2), ParamValue::Int(5), ParamValue::Int(10)],
                    },
                },
            ],
        };
        let r = grid_search(&space, &ds, 5, Scorer::Sds, 0).unwrap();
        assert_eq!(r.trials.len(), 6);
        // every point distinct
        let mut specs: Vec<String> =
            r.trials.iter().map(|t| serde_json::to_string(&t.spec).unwrap()).collect();
        specs.sort();
        specs.dedup();
        assert_eq!(specs.len(), 6);
    }

    #[test]
    fn grid_rejects_continuous_dimension() {
        let space = ParamSpace {
            family: Family::SvmRbf,
            dims: vec![ParamDim {
                name: "c".into(),
                domain: Domain::LogUniform { lo: 0.1, hi: 10.0 },
            }],
        };
        let ds = blobs(20, 0.4, 3);
        assert!(grid_search(&space, &ds, 5, Scorer::Sds, 0).is_err());
    }

    #[test]
    fn randomized_matches_grid_argmax_on_noisy_knn() {
        // Two overlapping classes: small k overfits, larger k smooths; the
        // grid argmax is the oracle and the randomized run must select the
        // same neighbor count.
        let ds = blobs(40, 1.8, 12);
        let space = knn_space(1, 15);
        let grid = grid_search(&space, &ds, 10, Scorer::FWeighted, 4).unwrap();
        let rand = randomized_search(&space, &ds, 15, 10, Scorer::FWeighted, 4).unwrap();
        let k_of = |s: &ModelSpec| match &s.params {
            FamilyParams::Knn(p) => p.neighbor_count,
            _ => unreachable!(),
        };
        assert_eq!(k_of(&grid.best_spec), k_of(&rand.best_spec));
    }

    #[test]
    fn cv_perfect_classifier_scores_one_everywhere() {
        // label leaked as a feature; CART reads it off
        let n = 60;
        let y: Vec<Class> = (0..n)
            .map(|i| match i % 3 {
                0 => Class::Circular,
                1 => Class::Elongated,
                _ => Class::Other,
            })
            .collect();
        let x = Array2::from_shape_fn((n, 2), |(i, j)| {
            if j == 0 {
                (i % 3) as f64
            } else {
                (i as f64 * 0.37).sin()
            }
        });
        let ds = crate::data::Dataset::new(
            x,
            y,
            vec!["leak".into(), "noise".into()],
            Provenance::default(),
        )
        .unwrap();
        let spec = ModelSpec::paper_preset(Family::Cart, Scorer::Sds, 0);
        let scores = cross_val_score(&spec, &ds, 10, Scorer::Sds, 5).unwrap();
        assert!(scores.iter().all(|&s| s == 1.0), "{scores:?}");
    }

    #[test]
    fn cv_majority_stump_matches_base_rate() {
        // 70/30 binary labels; a tree that cannot split predicts the
        // majority class, and binary SDS equals accuracy
        let n = 100;
        let y: Vec<Class> = (0..n)
            .map(|i| if i % 10 < 7 { Class::Circular } else { Class::Elongated })
            .collect();
        let x = Array2::from_shape_fn((n, 1), |(i, _)| (i as f64 * 0.11).cos());
        let ds =
            crate::data::Dataset::new(x, y, vec!["f".into()], Provenance::default()).unwrap();
        let spec = ModelSpec {
            params: FamilyParams::Cart(crate::models::CartParams {
                max_depth: None,
                min_samples_leaf: 90, // cannot split
                min_samples_split: 95,
                max_features: MaxFeatures::All,
            }),
            seed: 0,
        };
        let scores = cross_val_score(&spec, &ds, 10, Scorer::Sds, 5).unwrap();
        let mean = scores.iter().sum::<f64>() / scores.len() as f64;
        assert!((mean - 0.7).abs() < 0.05, "mean {mean}");
    }

    #[test]
    fn cv_mean_equals_recomputed_mean() {
        let ds = blobs(30, 0.6, 6);
        let space = knn_space(2, 4);
        let r = randomized_search(&space, &ds, 5, 5, Scorer::Sds, 1).unwrap();
        for t in &r.trials {
            let mean = t.fold_scores.iter().sum::<f64>() / t.fold_scores.len() as f64;
            assert!((mean - t.mean).abs() < 1e-12);
        }
    }

    #[test]
    fn fold_scaler_never_sees_validation_rows() {
        // plant an extreme outlier; whenever it sits in the validation fold,
        // the fold's scaler statistics must not reflect it
        let n = 50;
        let mut values: Vec<f64> = (0..n).map(|i| i as f64 * 0.1).collect();
        let outlier_row = 13;
        values[outlier_row] = 1.0e6;
        let x = Array2::from_shape_vec((n, 1), values).unwrap();
        let y: Vec<Class> = (0..n)
            .map(|i| if i % 2 == 0 { Class::Circular } else { Class::Elongated })
            .collect();
        let ds =
            crate::data::Dataset::new(x, y, vec!["f".into()], Provenance::default()).unwrap();
        let folds = kfold(n, 10, 3, Some(ds.y())).unwrap();
        let mut outlier_was_validated = false;
        for (train_idx, valid_idx) in &folds {
            let (scaled_train, scaled_valid, stats) =
                prepare_fold(&ds, train_idx, valid_idx).unwrap();
            if valid_idx.contains(&outlier_row) {
                outlier_was_validated = true;
                assert!(
                    stats.mean[0] < 100.0,
                    "scaler leaked the validation outlier: mean {}",
                    stats.mean[0]
                );
                // the outlier shows up as a huge z-score in the scaled fold
                let max_z = scaled_valid.x().iter().cloned().fold(0.0f64, f64::max);
                assert!(max_z > 1000.0);
            }
            // fold-train columns are standardized exactly
            let means = matrix_column_means(scaled_train.x());
            assert!(means[0].abs() < 1e-9);
        }
        assert!(outlier_was_validated, "test setup: outlier never validated");
    }

    #[test]
    fn deterministic_search_results() {
        let ds = blobs(30, 0.8, 4);
        let space = default_space(Family::Knn);
        let a = randomized_search(&space, &ds, 8, 5, Scorer::Sds, 21).unwrap();
        let b = randomized_search(&space, &ds, 8, 5, Scorer::Sds, 21).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }

    #[test]
    fn space_json_round_trip() {
        let space = default_space(Family::RandomForest);
        let json = serde_json::to_string(&space).unwrap();
        let back: ParamSpace = serde_json::from_str(&json).unwrap();
        assert_eq!(back.grid_size().unwrap(), space.grid_size().unwrap());
    }
}
