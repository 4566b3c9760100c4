//! Feature selection and reduction: impurity-based importance rankings,
//! wrapper-based incremental subset search, PCA and LDA.

use nalgebra::{DMatrix, DVector};
use ndarray::{Array1, Array2, Axis};
use serde::{Deserialize, Serialize};

use crate::data::{Class, Dataset};
use crate::error::CoreError;
use crate::metrics::Scorer;
use crate::models::{
    forest_feature_importance, gb_feature_importance, Family, Fitted, MatrixData, TrainedModel,
};
use crate::search::{default_space, grid_search, ParamSpace, SearchResult};
use crate::Result;

/// Ordered (feature name, score) pairs, descending. Scores from
/// impurity-based rankings are non-negative and sum to 1.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ImportanceRanking {
    pub entries: Vec<(String, f64)>,
}

impl ImportanceRanking {
    fn from_scores(names: &[String], scores: Vec<f64>) -> Result<Self> {
        if names.len() != scores.len() {
            return Err(CoreError::Data("importance length mismatch".into()));
        }
        if let Some(v) = scores.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(CoreError::Model(format!("invalid importance score {v}")));
        }
        let mut entries: Vec<(String, f64)> =
            names.iter().cloned().zip(scores).collect();
        // stable sort: ties keep catalog order
        entries.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap());
        Ok(ImportanceRanking { entries })
    }

    /// The top `n` feature names, in ranking order.
    pub fn prefix(&self, n: usize) -> Vec<String> {
        self.entries.iter().take(n).map(|(name, _)| name.clone()).collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Mean-decrease-impurity ranking of a fitted random forest.
pub fn rf_importance(model: &TrainedModel) -> Result<ImportanceRanking> {
    match &model.fitted {
        Fitted::Forest(f) if model.spec.family() == Family::RandomForest => {
            let scores = forest_feature_importance(f, model.feature_names.len());
            ImportanceRanking::from_scores(&model.feature_names, scores)
        }
        _ => Err(CoreError::Model("expected a fitted random forest".into())),
    }
}

/// Mean impurity-gain ranking of a fitted gradient-boosting model, averaged
/// across all boosted trees and classes.
pub fn gb_importance(model: &TrainedModel) -> Result<ImportanceRanking> {
    match &model.fitted {
        Fitted::Boosting(f) => {
            let scores = gb_feature_importance(f, model.feature_names.len());
            ImportanceRanking::from_scores(&model.feature_names, scores)
        }
        _ => Err(CoreError::Model("expected a fitted gradient-boosting model".into())),
    }
}

/// Wrapper search outcome: the best ranking prefix and the score-vs-size
/// curve behind it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WrapperResult {
    pub best_subset: Vec<String>,
    pub best_score: f64,
    /// (subset size, best CV score at that size), ascending sizes.
    pub curve: Vec<(usize, f64)>,
    /// Search result at the winning size.
    pub best_search: SearchResult,
}

/// Evaluated prefix sizes: every size up to 30, then steps of 5, and always
/// the full feature count.
pub fn wrapper_sizes(d: usize) -> Vec<usize> {
    let mut sizes: Vec<usize> = (1..=d.min(30)).collect();
    let mut s = 35;
    while s < d {
        sizes.push(s);
        s += 5;
    }
    if d > 30 {
        sizes.push(d);
    }
    sizes
}

/// Incremental wrapper selection: evaluates prefixes of the ranking with a
/// grid search per size and returns the argmax prefix (ties prefer the
/// smaller subset) plus the full curve.
pub fn wrapper_incremental(
    family: Family,
    ranking: &ImportanceRanking,
    train: &Dataset,
    scorer: Scorer,
    k: usize,
    seed: u64,
    space: Option<&ParamSpace>,
) -> Result<WrapperResult> {
    if ranking.is_empty() {
        return Err(CoreError::Data("empty ranking".into()));
    }
    let owned_space;
    let space = match space {
        Some(s) => s,
        None => {
            owned_space = default_space(family);
            &owned_space
        }
    };
    let mut curve = Vec::new();
    let mut best: Option<(usize, f64, SearchResult, Vec<String>)> = None;
    for size in wrapper_sizes(ranking.len()) {
        let subset = ranking.prefix(size);
        let sub_train = train.select_features(&subset)?;
        let result = grid_search(space, &sub_train, k, scorer, seed)?;
        curve.push((size, result.best_cv_score));
        let better = match &best {
            None => true,
            Some((_, score, _, _)) => result.best_cv_score > *score,
        };
        if better {
            best = Some((size, result.best_cv_score, result, subset));
        }
    }
    let (_, best_score, best_search, best_subset) = best.expect("at least one size evaluated");
    Ok(WrapperResult { best_subset, best_score, curve, best_search })
}

/// Linear projection fitted on training data.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Projection {
    pub kind: ProjectionKind,
    pub mean: Vec<f64>,
    /// `d x m` component matrix, columns orthonormal for PCA.
    pub components: MatrixData,
    /// Explained-variance ratios (PCA) or discriminant ratios (LDA),
    /// descending.
    pub ratios: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProjectionKind {
    Pca,
    Lda,
}

impl Projection {
    pub fn component_count(&self) -> usize {
        self.components.cols
    }

    /// Keeps the first `m` components.
    pub fn truncate(&self, m: usize) -> Projection {
        let m = m.min(self.components.cols);
        let full = self.components.to_array();
        let kept = full.slice(ndarray::s![.., ..m]).to_owned();
        Projection {
            kind: self.kind,
            mean: self.mean.clone(),
            components: MatrixData::from_array(&kept),
            ratios: self.ratios[..m].to_vec(),
        }
    }

    /// Smallest component count whose cumulative ratio strictly exceeds
    /// `fraction`.
    pub fn components_for_ratio(&self, fraction: f64) -> usize {
        let mut acc = 0.0;
        for (i, r) in self.ratios.iter().enumerate() {
            acc += r;
            if acc > fraction {
                return i + 1;
            }
        }
        self.ratios.len()
    }
}

/// Projects rows: `(x - mean) * components`.
pub fn project(p: &Projection, x: &Array2<f64>) -> Result<Array2<f64>> {
    if x.ncols() != p.mean.len() {
        return Err(CoreError::Data(format!(
            "projection fitted on {} columns, got {}",
            p.mean.len(),
            x.ncols()
        )));
    }
    let mean = Array1::from_vec(p.mean.clone());
    let centered = x - &mean.broadcast((x.nrows(), x.ncols())).unwrap();
    Ok(centered.dot(&p.components.to_array()))
}

/// Component names for projected datasets.
pub fn component_names(kind: ProjectionKind, m: usize) -> Vec<String> {
    let prefix = match kind {
        ProjectionKind::Pca => "PC",
        ProjectionKind::Lda => "LD",
    };
    (1..=m).map(|i| format!("{prefix}{i}")).collect()
}

/// Fixes component sign so each column's largest-magnitude entry is
/// positive; ties take the first index.
fn fix_signs(components: &mut DMatrix<f64>) {
    for c in 0..components.ncols() {
        let mut arg = 0usize;
        for r in 0..components.nrows() {
            if components[(r, c)].abs() > components[(arg, c)].abs() {
                arg = r;
            }
        }
        if components[(arg, c)] < 0.0 {
            for r in 0..components.nrows() {
                components[(r, c)] = -components[(r, c)];
            }
        }
    }
}

/// PCA: eigen-decomposition of the training covariance, components in
/// descending eigenvalue order with deterministic signs.
pub fn pca_fit(x: &Array2<f64>) -> Result<Projection> {
    let (n, d) = (x.nrows(), x.ncols());
    if n < 2 {
        return Err(CoreError::Data("PCA needs at least 2 samples".into()));
    }
    let mean: Vec<f64> = x.mean_axis(Axis(0)).unwrap().to_vec();
    let mut cov = DMatrix::<f64>::zeros(d, d);
    for row in x.rows() {
        let centered: Vec<f64> = row.iter().zip(&mean).map(|(v, m)| v - m).collect();
        for i in 0..d {
            for j in i..d {
                cov[(i, j)] += centered[i] * centered[j];
            }
        }
    }
    for i in 0..d {
        for j in i..d {
            cov[(i, j)] /= n as f64 - 1.0;
            cov[(j, i)] = cov[(i, j)];
        }
    }
    let eig = cov.symmetric_eigen();
    let total: f64 = eig.eigenvalues.iter().map(|v| v.max(0.0)).sum();
    if total <= 0.0 {
        return Err(CoreError::Data("zero-variance data: PCA undefined".into()));
    }
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].partial_cmp(&eig.eigenvalues[a]).unwrap());
    let mut components = DMatrix::<f64>::zeros(d, d);
    let mut ratios = Vec::with_capacity(d);
    for (c, &src) in order.iter().enumerate() {
        for r in 0..d {
            components[(r, c)] = eig.eigenvectors[(r, src)];
        }
        ratios.push(eig.eigenvalues[src].max(0.0) / total);
    }
    fix_signs(&mut components);
    Ok(Projection {
        kind: ProjectionKind::Pca,
        mean,
        components: MatrixData {
            rows: d,
            cols: d,
            data: components.transpose().as_slice().to_vec(),
        },
        ratios,
    })
}

/// LDA: components maximize the generalized Rayleigh quotient of between to
/// within scatter, solved by whitening the within scatter (with a ridge
/// fallback when it is singular). At most `classes - 1` components.
pub fn lda_fit(x: &Array2<f64>, y: &[Class]) -> Result<Projection> {
    let (n, d) = (x.nrows(), x.ncols());
    if n != y.len() {
        return Err(CoreError::Data("row/label mismatch".into()));
    }
    let mut classes: Vec<Class> = y.to_vec();
    classes.sort_unstable();
    classes.dedup();
    let c = classes.len();
    if c < 2 {
        return Err(CoreError::Data("LDA needs at least two classes".into()));
    }

    let global_mean: Vec<f64> = x.mean_axis(Axis(0)).unwrap().to_vec();
    let mut sw = DMatrix::<f64>::zeros(d, d);
    let mut sb = DMatrix::<f64>::zeros(d, d);
    for class in &classes {
        let rows: Vec<usize> = (0..n).filter(|&i| y[i] == *class).collect();
        let nc = rows.len() as f64;
        let mut mu = vec![0.0f64; d];
        for &i in &rows {
            for j in 0..d {
                mu[j] += x[(i, j)] / nc;
            }
        }
        for &i in &rows {
            for a in 0..d {
                for b in a..d {
                    let va = x[(i, a)] - mu[a];
                    let vb = x[(i, b)] - mu[b];
                    sw[(a, b)] += va * vb;
                }
            }
        }
        for a in 0..d {
            for b in a..d {
                sb[(a, b)] += nc * (mu[a] - global_mean[a]) * (mu[b] - global_mean[b]);
            }
        }
    }
    for a in 0..d {
        for b in a..d {
            sw[(b, a)] = sw[(a, b)];
            sb[(b, a)] = sb[(a, b)];
        }
    }

    // Whiten: Sw = L L^T, then the symmetric problem L^-1 Sb L^-T.
    let chol = match sw.clone().cholesky() {
        Some(c) => c,
        None => {
            let ridge = 1e-6 * (sw.trace() / d as f64).max(1.0);
            log::warn!("singular within-class scatter; applying ridge {ridge:e}");
            for i in 0..d {
                sw[(i, i)] += ridge;
            }
            sw.clone().cholesky().ok_or_else(|| {
                CoreError::Data("within-class scatter not positive definite".into())
            })?
        }
    };
    let l = chol.l();
    let l_inv = l
        .clone()
        .try_inverse()
        .ok_or_else(|| CoreError::Data("failed to invert scatter factor".into()))?;
    let m = &l_inv * &sb * l_inv.transpose();
    let eig = m.symmetric_eigen();

    let keep = (c - 1).min(d);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].partial_cmp(&eig.eigenvalues[a]).unwrap());
    order.truncate(keep);

    let total: f64 = order.iter().map(|&i| eig.eigenvalues[i].max(0.0)).sum();
    let mut components = DMatrix::<f64>::zeros(d, keep);
    let mut ratios = Vec::with_capacity(keep);
    let l_inv_t = l_inv.transpose();
    for (col, &src) in order.iter().enumerate() {
        let u = DVector::from_iterator(d, (0..d).map(|r| eig.eigenvectors[(r, src)]));
        let mut w = &l_inv_t * u;
        let norm = w.norm();
        if norm > 0.0 {
            w /= norm;
        }
        for r in 0..d {
            components[(r, col)] = w[r];
        }
        ratios.push(if total > 0.0 { eig.eigenvalues[src].max(0.0) / total } else { 0.0 });
    }
    fix_signs(&mut components);
    Ok(Projection {
        kind: ProjectionKind::Lda,
        mean: global_mean,
        components: MatrixData {
            rows: d,
            cols: keep,
            data: components.transpose().as_slice().to_vec(),
        },
        ratios,
    })
}
