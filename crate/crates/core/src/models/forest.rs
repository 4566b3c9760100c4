//! Bagged tree ensembles: random forest (bootstrap + per-split feature
//! subsampling) and extremely randomized trees (random cut-points).

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::CoreError;
use crate::Result;

use super::tree::{argmax, grow, GrowConfig, Targets, Tree};
use super::ForestParams;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ForestFitted {
    pub trees: Vec<Tree>,
    pub class_count: usize,
}

pub fn fit(
    params: &ForestParams,
    x: &Array2<f64>,
    y: &[usize],
    class_count: usize,
    random_thresholds: bool,
    seed: u64,
) -> Result<ForestFitted> {
    if x.nrows() != y.len() {
        return Err(CoreError::Data("row/label mismatch".into()));
    }
    let n = x.nrows();
    // Per-tree seeds are drawn up front so the result does not depend on the
    // parallel schedule.
    let mut seeder = ChaCha8Rng::seed_from_u64(seed);
    let tree_seeds: Vec<u64> = (0..params.tree_count).map(|_| seeder.random()).collect();

    let view = x.view();
    let trees: Vec<Tree> = tree_seeds
        .into_par_iter()
        .map(|tree_seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(tree_seed);
            let samples: Vec<usize> = if params.bootstrap {
                (0..n).map(|_| rng.random_range(0..n)).collect()
            } else {
                (0..n).collect()
            };
            let config = GrowConfig {
                max_depth: params.max_depth,
                min_samples_leaf: params.min_samples_leaf,
                min_samples_split: params.min_samples_split,
                feature_subset: params.max_features.resolve(x.ncols()),
                random_thresholds,
                class_count,
            };
            grow(&view, &Targets::Classes(y), &samples, &config, &mut rng)
        })
        .collect();

    Ok(ForestFitted { trees, class_count })
}

/// Majority vote of the per-tree predicted classes; ties break toward the
/// lowest class index.
pub fn predict(fitted: &ForestFitted, x: &Array2<f64>) -> Vec<usize> {
    x.rows()
        .into_iter()
        .map(|row| {
            let mut votes = vec![0.0f64; fitted.class_count];
            for tree in &fitted.trees {
                votes[tree.predict_class(row)] += 1.0;
            }
            argmax(&votes)
        })
        .collect()
}

/// Mean decrease impurity per feature: weighted impurity decreases summed
/// over all splits, averaged over trees and normalized to sum 1.
pub fn feature_importance(fitted: &ForestFitted, feature_count: usize) -> Vec<f64> {
    let mut total = vec![0.0f64; feature_count];
    for tree in &fitted.trees {
        for (i, v) in tree.importance.iter().enumerate() {
            total[i] += v;
        }
    }
    for v in &mut total {
        *v /= fitted.trees.len() as f64;
    }
    let sum: f64 = total.iter().sum();
    if sum > 0.0 {
        for v in &mut total {
            *v /= sum;
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::super::{
        fit as model_fit, Family, FamilyParams, Fitted, MaxFeatures, ModelSpec,
    };
    use super::*;
    use crate::data::split_train_test;
    use crate::metrics::Scorer;
    use crate::models::test_support::{accuracy, blobs};

    #[test]
    fn table_presets_reach_95_percent_on_blobs() {
        let ds = blobs(200, 0.35, 20);
        let (train, test, _) = split_train_test(&ds, 0.7, 1).unwrap();
        for family in [Family::RandomForest, Family::ExtraTrees, Family::GradientBoosting] {
            let spec = ModelSpec::paper_preset(family, Scorer::Sds, 5);
            let model = model_fit(&spec, &train).unwrap();
            let pred = model.predict_dataset(&test).unwrap();
            let acc = accuracy(&pred, test.y());
            assert!(acc >= 0.95, "{}: {acc}", family.as_str());
        }
    }

    #[test]
    fn single_tree_no_bootstrap_all_features_equals_cart() {
        use rand::Rng;
        use rand::SeedableRng;
        // five random small datasets
        for seed in 0..5u64 {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let n = 40;
            let x = Array2::from_shape_fn((n, 3), |_| rng.random_range(-2.0..2.0));
            let y: Vec<usize> = (0..n)
                .map(|i| if x[(i, 0)] + x[(i, 1)] > 0.0 { 1 } else { 0 })
                .collect();

            let forest = fit(
                &ForestParams {
                    tree_count: 1,
                    max_depth: None,
                    min_samples_leaf: 2,
                    min_samples_split: 4,
                    max_features: MaxFeatures::All,
                    bootstrap: false,
                },
                &x,
                &y,
                2,
                false,
                seed,
            )
            .unwrap();
            let cart = super::super::tree::fit_cart(
                &super::super::CartParams {
                    max_depth: None,
                    min_samples_leaf: 2,
                    min_samples_split: 4,
                    max_features: MaxFeatures::All,
                },
                &x,
                &y,
                2,
            )
            .unwrap();
            let fp = predict(&forest, &x);
            let cp = super::super::tree::predict(&cart, &x);
            assert_eq!(fp, cp, "seed {seed}");
        }
    }

    #[test]
    fn importance_normalized_and_concentrated() {
        let ds = blobs(60, 0.3, 9);
        let spec = ModelSpec::paper_preset(Family::RandomForest, Scorer::Sds, 2);
        let model = model_fit(&spec, &ds).unwrap();
        if let Fitted::Forest(f) = &model.fitted {
            let imp = feature_importance(f, 2);
            assert!((imp.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            assert!(imp.iter().all(|&v| v >= 0.0));
        } else {
            panic!("expected forest");
        }
    }

    #[test]
    fn forest_deterministic_under_parallelism() {
        let ds = blobs(50, 0.6, 4);
        let spec = ModelSpec {
            params: FamilyParams::RandomForest(ForestParams {
                tree_count: 24,
                max_depth: None,
                min_samples_leaf: 1,
                min_samples_split: 2,
                max_features: MaxFeatures::Sqrt,
                bootstrap: true,
            }),
            seed: 33,
        };
        let m1 = model_fit(&spec, &ds).unwrap();
        let m2 = model_fit(&spec, &ds).unwrap();
        assert_eq!(
            m1.predict_dataset(&ds).unwrap(),
            m2.predict_dataset(&ds).unwrap()
        );
    }
}
