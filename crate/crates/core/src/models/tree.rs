//! Binary decision trees: Gini-impurity classification (best-split CART)
//! and squared-error regression used by the boosting and forest ensembles.

use ndarray::{Array2, ArrayView1, ArrayView2};
use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::CoreError;
use crate::Result;

use super::CartParams;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum Node {
    Split { feature: usize, threshold: f64, left: usize, right: usize },
    /// Classification: per-class sample counts. Regression: (value, weight).
    ClassLeaf { counts: Vec<f64> },
    ValueLeaf { value: f64 },
}

/// A fitted tree plus the impurity decrease it attributes to each feature.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
    pub importance: Vec<f64>,
}

impl Tree {
    /// Index of the leaf a row lands in.
    pub fn apply(&self, row: ArrayView1<f64>) -> usize {
        let mut idx = 0usize;
        loop {
            match &self.nodes[idx] {
                Node::Split { feature, threshold, left, right } => {
                    idx = if row[*feature] <= *threshold { *left } else { *right };
                }
                _ => return idx,
            }
        }
    }

    pub fn predict_class(&self, row: ArrayView1<f64>) -> usize {
        match &self.nodes[self.apply(row)] {
            Node::ClassLeaf { counts } => argmax(counts),
            _ => unreachable!("classification tree has class leaves"),
        }
    }

    pub fn predict_value(&self, row: ArrayView1<f64>) -> f64 {
        match &self.nodes[self.apply(row)] {
            Node::ValueLeaf { value } => *value,
            Node::ClassLeaf { counts } => argmax(counts) as f64,
            _ => unreachable!(),
        }
    }
}

/// First maximum wins, so ties break toward the lowest class index.
pub(crate) fn argmax(values: &[f64]) -> usize {
    let mut best = 0usize;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

pub struct GrowConfig {
    pub max_depth: Option<usize>,
    pub min_samples_leaf: usize,
    pub min_samples_split: usize,
    /// Number of candidate features per split.
    pub feature_subset: usize,
    /// Extra-trees mode: one uniformly random cut per candidate feature
    /// instead of the exhaustive best split.
    pub random_thresholds: bool,
    pub class_count: usize,
}

/// Grows a tree on `samples` (row indices into `x`, may repeat for
/// bootstrap). `targets` are class indices for Gini and real values for
/// squared error. `rng` drives feature subsampling and random cuts; it is
/// not consumed when the subset covers all features and cuts are exhaustive,
/// so plain CART is seed-independent.
pub fn grow(
    x: &ArrayView2<f64>,
    targets: &Targets,
    samples: &[usize],
    config: &GrowConfig,
    rng: &mut ChaCha8Rng,
) -> Tree {
    let mut tree = Tree { nodes: Vec::new(), importance: vec![0.0; x.ncols()] };
    let root_samples: Vec<u32> = samples.iter().map(|&s| s as u32).collect();
    let total = root_samples.len() as f64;
    grow_node(x, targets, root_samples, 0, config, rng, &mut tree, total);
    tree
}

/// Training targets for the grower.
pub enum Targets<'a> {
    Classes(&'a [usize]),
    Values(&'a [f64]),
}

struct NodeStats {
    impurity: f64,
    counts: Vec<f64>,
    sum: f64,
}

fn node_stats(targets: &Targets, samples: &[u32], class_count: usize) -> NodeStats {
    match targets {
        Targets::Classes(y) => {
            let mut counts = vec![0.0; class_count];
            for &s in samples {
                counts[y[s as usize]] += 1.0;
            }
            let n = samples.len() as f64;
            let gini = 1.0 - counts.iter().map(|c| (c / n) * (c / n)).sum::<f64>();
            NodeStats { impurity: gini, counts, sum: 0.0 }
        }
        Targets::Values(v) => {
            let n = samples.len() as f64;
            let sum: f64 = samples.iter().map(|&s| v[s as usize]).sum();
            let mean = sum / n;
            let var =
                samples.iter().map(|&s| (v[s as usize] - mean).powi(2)).sum::<f64>() / n;
            NodeStats { impurity: var, counts: Vec::new(), sum }
        }
    }
}

fn make_leaf(targets: &Targets, stats: &NodeStats, samples: &[u32]) -> Node {
    match targets {
        Targets::Classes(_) => Node::ClassLeaf { counts: stats.counts.clone() },
        Targets::Values(_) => Node::ValueLeaf { value: stats.sum / samples.len() as f64 },
    }
}

#[allow(clippy::too_many_arguments)]
fn grow_node(
    x: &ArrayView2<f64>,
    targets: &Targets,
    samples: Vec<u32>,
    depth: usize,
    config: &GrowConfig,
    rng: &mut ChaCha8Rng,
    tree: &mut Tree,
    total: f64,
) -> usize {
    let stats = node_stats(targets, &samples, config.class_count);
    let n = samples.len();
    let depth_stop = config.max_depth.is_some_and(|d| depth >= d);
    if depth_stop || n < config.min_samples_split || stats.impurity <= 1e-15 {
        let idx = tree.nodes.len();
        tree.nodes.push(make_leaf(targets, &stats, &samples));
        return idx;
    }

    let d = x.ncols();
    let candidates: Vec<usize> = if config.feature_subset >= d && !config.random_thresholds {
        (0..d).collect()
    } else {
        let mut all: Vec<usize> = (0..d).collect();
        all.shuffle(rng);
        all.truncate(config.feature_subset.max(1));
        all
    };

    let mut best: Option<(f64, usize, f64)> = None; // (weighted decrease, feature, threshold)
    for &feature in &candidates {
        if config.random_thresholds {
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for &s in &samples {
                let v = x[(s as usize, feature)];
                lo = lo.min(v);
                hi = hi.max(v);
            }
            if lo >= hi {
                continue;
            }
            let t: f64 = lo + rand::Rng::random_range(rng, 0.0..1.0) * (hi - lo);
            if let Some(dec) =
                split_decrease(x, targets, &samples, feature, t, config, stats.impurity)
            {
                if best.is_none() || dec > best.unwrap().0 {
                    best = Some((dec, feature, t));
                }
            }
        } else {
            // exhaustive best split over midpoints of sorted distinct values
            let mut order: Vec<u32> = samples.clone();
            order.sort_by(|&a, &b| {
                x[(a as usize, feature)]
                    .partial_cmp(&x[(b as usize, feature)])
                    .unwrap()
                    .then(a.cmp(&b))
            });
            if let Some((dec, t)) =
                best_split_sorted(x, targets, &order, feature, config, stats.impurity)
            {
                if best.is_none() || dec > best.unwrap().0 {
                    best = Some((dec, feature, t));
                }
            }
        }
    }

    let Some((decrease, feature, threshold)) = best else {
        let idx = tree.nodes.len();
        tree.nodes.push(make_leaf(targets, &stats, &samples));
        return idx;
    };

    let (left_samples, right_samples): (Vec<u32>, Vec<u32>) = samples
        .iter()
        .partition(|&&s| x[(s as usize, feature)] <= threshold);
    debug_assert!(
        left_samples.len() >= config.min_samples_leaf
            && right_samples.len() >= config.min_samples_leaf
    );

    tree.importance[feature] += (n as f64 / total) * decrease;
    let idx = tree.nodes.len();
    tree.nodes.push(Node::Split { feature, threshold, left: 0, right: 0 });
    let left = grow_node(x, targets, left_samples, depth + 1, config, rng, tree, total);
    let right = grow_node(x, targets, right_samples, depth + 1, config, rng, tree, total);
    if let Node::Split { left: l, right: r, .. } = &mut tree.nodes[idx] {
        *l = left;
        *r = right;
    }
    idx
}

/// Impurity decrease of one fixed (feature, threshold) candidate, or None if
/// a side violates `min_samples_leaf`.
fn split_decrease(
    x: &ArrayView2<f64>,
    targets: &Targets,
    samples: &[u32],
    feature: usize,
    threshold: f64,
    config: &GrowConfig,
    parent_impurity: f64,
) -> Option<f64> {
    let n = samples.len() as f64;
    match targets {
        Targets::Classes(y) => {
            let mut left = vec![0.0f64; config.class_count];
            let mut right = vec![0.0f64; config.class_count];
            for &s in samples {
                if x[(s as usize, feature)] <= threshold {
                    left[y[s as usize]] += 1.0;
                } else {
                    right[y[s as usize]] += 1.0;
                }
            }
            let nl: f64 = left.iter().sum();
            let nr: f64 = right.iter().sum();
            if (nl as usize) < config.min_samples_leaf || (nr as usize) < config.min_samples_leaf
            {
                return None;
            }
            let gini = |c: &[f64], m: f64| 1.0 - c.iter().map(|v| (v / m) * (v / m)).sum::<f64>();
            Some(parent_impurity - nl / n * gini(&left, nl) - nr / n * gini(&right, nr))
        }
        Targets::Values(v) => {
            let (mut sl, mut ql, mut nl) = (0.0f64, 0.0f64, 0.0f64);
            let (mut sr, mut qr, mut nr) = (0.0f64, 0.0f64, 0.0f64);
            for &s in samples {
                let val = v[s as usize];
                if x[(s as usize, feature)] <= threshold {
                    sl += val;
                    ql += val * val;
                    nl += 1.0;
                } else {
                    sr += val;
                    qr += val * val;
                    nr += 1.0;
                }
            }
            if (nl as usize) < config.min_samples_leaf || (nr as usize) < config.min_samples_leaf
            {
                return None;
            }
            let var = |s: f64, q: f64, m: f64| q / m - (s / m) * (s / m);
            Some(parent_impurity - nl / n * var(sl, ql, nl) - nr / n * var(sr, qr, nr))
        }
    }
}

/// Exhaustive scan over sorted samples; candidates are midpoints between
/// distinct consecutive values. Ties in decrease keep the earliest
/// (lowest-threshold) candidate, making the search deterministic.
fn best_split_sorted(
    x: &ArrayView2<f64>,
    targets: &Targets,
    order: &[u32],
    feature: usize,
    config: &GrowConfig,
    parent_impurity: f64,
) -> Option<(f64, f64)> {
    let n = order.len() as f64;
    let mut best: Option<(f64, f64)> = None;
    match targets {
        Targets::Classes(y) => {
            let mut left = vec![0.0f64; config.class_count];
            let mut right = vec![0.0f64; config.class_count];
            for &s in order {
                right[y[s as usize]] += 1.0;
            }
            let mut nl = 0.0f64;
            let total_right: f64 = n;
            let mut nr = total_right;
            for w in 0..order.len() - 1 {
                let s = order[w] as usize;
                left[y[s]] += 1.0;
                right[y[s]] -= 1.0;
                nl += 1.0;
                nr -= 1.0;
                let (a, b) = (x[(s, feature)], x[(order[w + 1] as usize, feature)]);
                if a == b {
                    continue;
                }
                if (nl as usize) < config.min_samples_leaf
                    || (nr as usize) < config.min_samples_leaf
                {
                    continue;
                }
                let gini =
                    |c: &[f64], m: f64| 1.0 - c.iter().map(|v| (v / m) * (v / m)).sum::<f64>();
                let dec = parent_impurity - nl / n * gini(&left, nl) - nr / n * gini(&right, nr);
                if best.is_none() || dec > best.unwrap().0 {
                    best = Some((dec, (a + b) / 2.0));
                }
            }
        }
        Targets::Values(v) => {
            let mut sl = 0.0f64;
            let mut ql = 0.0f64;
            let (mut sr, mut qr) = (0.0f64, 0.0f64);
            for &s in order {
                let val = v[s as usize];
                sr += val;
                qr += val * val;
            }
            let mut nl = 0.0f64;
            let mut nr = n;
            for w in 0..order.len() - 1 {
                let s = order[w] as usize;
                let val = v[s];
                sl += val;
                ql += val * val;
                sr -= val;
                qr -= val * val;
                nl += 1.0;
                nr -= 1.0;
                let (a, b) = (x[(s, feature)], x[(order[w + 1] as usize, feature)]);
                if a == b {
                    continue;
                }
                if (nl as usize) < config.min_samples_leaf
                    || (nr as usize) < config.min_samples_leaf
                {
                    continue;
                }
                let var = |s: f64, q: f64, m: f64| (q / m - (s / m) * (s / m)).max(0.0);
                let dec =
                    parent_impurity - nl / n * var(sl, ql, nl) - nr / n * var(sr, qr, nr);
                if best.is_none() || dec > best.unwrap().0 {
                    best = Some((dec, (a + b) / 2.0));
                }
            }
        }
    }
    best
}

/// Fitted CART classifier.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TreeFitted {
    pub tree: Tree,
    pub class_count: usize,
}

pub fn fit_cart(
    params: &CartParams,
    x: &Array2<f64>,
    y: &[usize],
    class_count: usize,
) -> Result<TreeFitted> {
    if x.nrows() != y.len() {
        return Err(CoreError::Data("row/label mismatch".into()));
    }
    let config = GrowConfig {
        max_depth: params.max_depth,
        min_samples_leaf: params.min_samples_leaf,
        min_samples_split: params.min_samples_split,
        feature_subset: params.max_features.resolve(x.ncols()),
        random_thresholds: false,
        class_count,
    };
    let samples: Vec<usize> = (0..x.nrows()).collect();
    let mut rng = rand::SeedableRng::seed_from_u64(0);
    let tree = grow(&x.view(), &Targets::Classes(y), &samples, &config, &mut rng);
    Ok(TreeFitted { tree, class_count })
}

pub fn predict(fitted: &TreeFitted, x: &Array2<f64>) -> Vec<usize> {
    x.rows().into_iter().map(|row| fitted.tree.predict_class(row)).collect()
}
