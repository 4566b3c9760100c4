//! Gradient boosting with shallow regression trees on the multiclass
//! log-loss: one tree per class per stage, Newton leaf updates with a
//! minimum hessian weight and an optional per-leaf update clamp, shrinkage
//! and optional row subsampling.

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::CoreError;
use crate::Result;

use super::tree::{argmax, grow, GrowConfig, Node, Targets, Tree};
use super::GbParams;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GbFitted {
    pub params: GbParams,
    pub class_count: usize,
    /// Log-prior initial score per class.
    pub init_scores: Vec<f64>,
    /// `stage_count` stages of `class_count` trees each.
    pub stages: Vec<Vec<Tree>>,
    /// Training multinomial log-loss after each stage.
    pub train_loss: Vec<f64>,
}

pub fn fit(
    params: &GbParams,
    x: &Array2<f64>,
    y: &[usize],
    class_count: usize,
    seed: u64,
) -> Result<GbFitted> {
    let n = x.nrows();
    if n != y.len() {
        return Err(CoreError::Data("row/label mismatch".into()));
    }
    let k = class_count;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // log-prior init
    let mut priors = vec![0.0f64; k];
    for &c in y {
        priors[c] += 1.0;
    }
    let init_scores: Vec<f64> =
        priors.iter().map(|p| (p / n as f64).max(1e-12).ln()).collect();

    let mut scores = vec![0.0f64; n * k];
    for i in 0..n {
        scores[i * k..(i + 1) * k].copy_from_slice(&init_scores);
    }

    let view = x.view();
    let mut stages = Vec::with_capacity(params.stage_count);
    let mut train_loss = Vec::with_capacity(params.stage_count);
    let mut probs = vec![0.0f64; n * k];
    let mut residuals = vec![0.0f64; n];

    for _stage in 0..params.stage_count {
        softmax_rows(&scores, &mut probs, n, k);

        // subsample rows without replacement
        let rows: Vec<usize> = if params.subsample < 1.0 {
            let take = ((params.subsample * n as f64).round() as usize).clamp(1, n);
            let mut all: Vec<usize> = (0..n).collect();
            all.shuffle(&mut rng);
            all.truncate(take);
            all.sort_unstable();
            all
        } else {
            (0..n).collect()
        };

        let mut stage_trees = Vec::with_capacity(k);
        for class in 0..k {
            for i in 0..n {
                let target = if y[i] == class { 1.0 } else { 0.0 };
                residuals[i] = target - probs[i * k + class];
            }
            let config = GrowConfig {
                max_depth: Some(params.max_depth),
                min_samples_leaf: params.min_samples_leaf,
                min_samples_split: params.min_samples_split,
                feature_subset: x.ncols(),
                random_thresholds: false,
                class_count: 0,
            };
            let mut tree = grow(&view, &Targets::Values(&residuals), &rows, &config, &mut rng);

            // Newton leaf re-estimation on the subsample:
            // value = (k-1)/k * sum(residual) / sum(p * (1 - p)),
            // clamped to +-max_delta_step, zeroed below min_child_weight.
            let mut leaf_num = vec![0.0f64; tree.nodes.len()];
            let mut leaf_den = vec![0.0f64; tree.nodes.len()];
            for &i in &rows {
                let leaf = tree.apply(view.row(i));
                let p = probs[i * k + class];
                leaf_num[leaf] += residuals[i];
                leaf_den[leaf] += p * (1.0 - p);
            }
            for (idx, node) in tree.nodes.iter_mut().enumerate() {
                if let Node::ValueLeaf { value } = node {
                    let den = leaf_den[idx];
                    let mut v = if den < params.min_child_weight.max(1e-12) {
                        0.0
                    } else {
                        (k as f64 - 1.0) / (k as f64) * leaf_num[idx] / den
                    };
                    if params.max_delta_step > 0.0 {
                        v = v.clamp(-params.max_delta_step, params.max_delta_step);
                    }
                    *value = v;
                }
            }

            // update all rows, not just the subsample
            for i in 0..n {
                scores[i * k + class] +=
                    params.learning_rate * tree.predict_value(view.row(i));
            }
            stage_trees.push(tree);
        }
        stages.push(stage_trees);

        softmax_rows(&scores, &mut probs, n, k);
        let loss = -(0..n)
            .map(|i| probs[i * k + y[i]].max(1e-300).ln())
            .sum::<f64>()
            / n as f64;
        train_loss.push(loss);
    }

    Ok(GbFitted {
        params: params.clone(),
        class_count: k,
        init_scores,
        stages,
        train_loss,
    })
}

fn softmax_rows(scores: &[f64], probs: &mut [f64], n: usize, k: usize) {
    for i in 0..n {
        let row = &scores[i * k..(i + 1) * k];
        let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut sum = 0.0;
        for (j, &s) in row.iter().enumerate() {
            let e = (s - max).exp();
            probs[i * k + j] = e;
            sum += e;
        }
        for j in 0..k {
            probs[i * k + j] /= sum;
        }
    }
}

pub fn predict(fitted: &GbFitted, x: &Array2<f64>) -> Vec<usize> {
    x.rows()
        .into_iter()
        .map(|row| {
            let mut scores = fitted.init_scores.clone();
            for stage in &fitted.stages {
                for (class, tree) in stage.iter().enumerate() {
                    scores[class] += fitted.params.learning_rate * tree.predict_value(row);
                }
            }
            argmax(&scores)
        })
        .collect()
}

/// Mean impurity gain per feature across all boosted trees and classes,
/// normalized to sum 1.
pub fn feature_importance(fitted: &GbFitted, feature_count: usize) -> Vec<f64> {
    let mut total = vec![0.0f64; feature_count];
    let mut tree_count = 0usize;
    for stage in &fitted.stages {
        for tree in stage {
            for (i, v) in tree.importance.iter().enumerate() {
                total[i] += v;
            }
            tree_count += 1;
        }
    }
    if tree_count > 0 {
        for v in &mut total {
            *v /= tree_count as f64;
        }
    }
    let sum: f64 = total.iter().sum();
    if sum > 0.0 {
        for v in &mut total {
            *v /= sum;
        }
    }
    total
}
