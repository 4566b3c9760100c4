//! Dataset container, label schema, standard scaling, stratified splitting
//! and k-fold generation.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use ndarray::{Array1, Array2, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::CoreError;
use crate::Result;

/// Cell morphology class. `Circular` is the normal (discocyte) class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Class {
    #[serde(rename = "c")]
    Circular,
    #[serde(rename = "e")]
    Elongated,
    #[serde(rename = "o")]
    Other,
}

impl Class {
    /// All three classes in canonical order.
    pub const ALL: [Class; 3] = [Class::Circular, Class::Elongated, Class::Other];

    /// The two-class (circular vs elongated) problem.
    pub const BINARY: [Class; 2] = [Class::Circular, Class::Elongated];

    pub fn as_str(self) -> &'static str {
        match self {
            Class::Circular => "c",
            Class::Elongated => "e",
            Class::Other => "o",
        }
    }

    pub fn parse(s: &str) -> Result<Class> {
        match s.trim() {
            "c" => Ok(Class::Circular),
            "e" => Ok(Class::Elongated),
            "o" => Ok(Class::Other),
            other => Err(CoreError::UnknownLabel(other.to_string())),
        }
    }
}

impl fmt::Display for Class {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Feature matrix plus labels. Immutable after construction.
#[derive(Debug, Clone)]
pub struct Dataset {
    x: Array2<f64>,
    y: Vec<Class>,
    feature_names: Vec<String>,
    /// Source path and per-row identifiers, kept for provenance in reports.
    pub provenance: Provenance,
}

/// Where the rows came from.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Provenance {
    pub source: String,
    pub row_ids: Vec<String>,
}

impl Dataset {
    /// Builds a dataset, validating shapes and finiteness.
    pub fn new(
        x: Array2<f64>,
        y: Vec<Class>,
        feature_names: Vec<String>,
        provenance: Provenance,
    ) -> Result<Self> {
        if x.nrows() != y.len() {
            return Err(CoreError::Data(format!(
                "row count {} does not match label count {}",
                x.nrows(),
                y.len()
            )));
        }
        if x.ncols() != feature_names.len() {
            return Err(CoreError::Data(format!(
                "column count {} does not match feature name count {}",
                x.ncols(),
                feature_names.len()
            )));
        }
        if let Some(v) = x.iter().find(|v| !v.is_finite()) {
            return Err(CoreError::Data(format!("non-finite feature value {v}")));
        }
        Ok(Dataset { x, y, feature_names, provenance })
    }

    pub fn n_samples(&self) -> usize {
        self.x.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.x.ncols()
    }

    pub fn x(&self) -> &Array2<f64> {
        &self.x
    }

    pub fn y(&self) -> &[Class] {
        &self.y
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    /// Classes present, in canonical order.
    pub fn classes(&self) -> Vec<Class> {
        Class::ALL.into_iter().filter(|c| self.y.contains(c)).collect()
    }

    /// Per-class sample counts in canonical class order.
    pub fn class_counts(&self) -> BTreeMap<Class, usize> {
        let mut counts = BTreeMap::new();
        for &c in &self.y {
            *counts.entry(c).or_insert(0) += 1;
        }
        counts
    }

    /// Row subset by index, preserving order.
    pub fn subset(&self, indices: &[usize]) -> Result<Dataset> {
        for &i in indices {
            if i >= self.n_samples() {
                return Err(CoreError::Data(format!("row index {i} out of bounds")));
            }
        }
        let x = self.x.select(Axis(0), indices);
        let y = indices.iter().map(|&i| self.y[i]).collect();
        let row_ids = if self.provenance.row_ids.is_empty() {
            Vec::new()
        } else {
            indices.iter().map(|&i| self.provenance.row_ids[i].clone()).collect()
        };
        Dataset::new(
            x,
            y,
            self.feature_names.clone(),
            Provenance { source: self.provenance.source.clone(), row_ids },
        )
    }

    /// Column subset by feature name, preserving the given order.
    pub fn select_features(&self, names: &[String]) -> Result<Dataset> {
        let mut cols = Vec::with_capacity(names.len());
        for n in names {
            let idx = self
                .feature_names
                .iter()
                .position(|f| f == n)
                .ok_or_else(|| CoreError::Data(format!("unknown feature {n:?}")))?;
            cols.push(idx);
        }
        let x = self.x.select(Axis(1), &cols);
        Dataset::new(x, self.y.clone(), names.to_vec(), self.provenance.clone())
    }

    /// Keeps only rows whose label is in `classes`.
    pub fn filter_classes(&self, classes: &[Class]) -> Result<Dataset> {
        let idx: Vec<usize> =
            (0..self.n_samples()).filter(|&i| classes.contains(&self.y[i])).collect();
        self.subset(&idx)
    }

    /// Replaces the feature matrix (e.g. after scaling or projection),
    /// keeping labels and provenance.
    pub fn with_matrix(&self, x: Array2<f64>, feature_names: Vec<String>) -> Result<Dataset> {
        Dataset::new(x, self.y.clone(), feature_names, self.provenance.clone())
    }
}

/// Per-feature mean and standard deviation learned on training data only.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScalerStats {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    /// Columns whose training standard deviation was zero; their std is
    /// replaced by 1 so the scaled column becomes all-zero.
    pub degenerate: Vec<usize>,
}

/// Learns z-score statistics from the training data. The standard deviation
/// uses the N-1 divisor.
pub fn standard_scale_fit(train: &Dataset) -> Result<ScalerStats> {
    let x = train.x();
    let n = x.nrows();
    if n < 2 {
        return Err(CoreError::Data(format!("need at least 2 samples to fit scaler, got {n}")));
    }
    let mut mean = Vec::with_capacity(x.ncols());
    let mut std = Vec::with_capacity(x.ncols());
    let mut degenerate = Vec::new();
    for (j, col) in x.axis_iter(Axis(1)).enumerate() {
        let mu = col.sum() / n as f64;
        let var = col.iter().map(|v| (v - mu).powi(2)).sum::<f64>() / (n as f64 - 1.0);
        let sd = var.sqrt();
        mean.push(mu);
        if sd > 0.0 {
            std.push(sd);
        } else {
            log::warn!("constant feature column {j}; scaled values forced to 0");
            degenerate.push(j);
            std.push(1.0);
        }
    }
    Ok(ScalerStats { mean, std, degenerate })
}

/// Applies train-fit statistics to a matrix: `z = (x - mean) / std`.
pub fn standard_scale_apply(stats: &ScalerStats, x: &Array2<f64>) -> Result<Array2<f64>> {
    if x.ncols() != stats.mean.len() {
        return Err(CoreError::Data(format!(
            "scaler fitted on {} columns, got {}",
            stats.mean.len(),
            x.ncols()
        )));
    }
    let mut out = x.clone();
    for (j, mut col) in out.axis_iter_mut(Axis(1)).enumerate() {
        let (mu, sd) = (stats.mean[j], stats.std[j]);
        col.mapv_inplace(|v| (v - mu) / sd);
    }
    Ok(out)
}

/// Inverts [`standard_scale_apply`].
pub fn standard_scale_invert(stats: &ScalerStats, z: &Array2<f64>) -> Result<Array2<f64>> {
    if z.ncols() != stats.mean.len() {
        return Err(CoreError::Data("column count mismatch".into()));
    }
    let mut out = z.clone();
    for (j, mut col) in out.axis_iter_mut(Axis(1)).enumerate() {
        let (mu, sd) = (stats.mean[j], stats.std[j]);
        col.mapv_inplace(|v| v * sd + mu);
    }
    Ok(out)
}

/// Train/test index split, serializable for exact reruns.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SplitManifest {
    pub seed: u64,
    pub train_fraction: f64,
    pub train_indices: Vec<usize>,
    pub test_indices: Vec<usize>,
}

/// Stratified train/test split. The test set receives
/// `round((1 - train_fraction) * n)` samples, allocated per class by largest
/// remainder so every class's test share is within one sample of the global
/// fraction.
pub fn split_train_test(
    ds: &Dataset,
    train_fraction: f64,
    seed: u64,
) -> Result<(Dataset, Dataset, SplitManifest)> {
    if !(0.0..1.0).contains(&train_fraction) || train_fraction <= 0.0 {
        return Err(CoreError::InvalidParameter(format!(
            "train_fraction must be in (0, 1), got {train_fraction}"
        )));
    }
    let counts = ds.class_counts();
    for (c, n) in &counts {
        if *n < 2 {
            return Err(CoreError::Data(format!("class {c} has only {n} sample(s)")));
        }
    }
    let n = ds.n_samples();
    let test_fraction = 1.0 - train_fraction;
    let test_total = (test_fraction * n as f64).round() as usize;

    // Largest-remainder allocation of the test quota across classes.
    let classes: Vec<Class> = counts.keys().copied().collect();
    let quotas: Vec<f64> = classes.iter().map(|c| test_fraction * counts[c] as f64).collect();
    let mut alloc: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
    let mut remaining = test_total.saturating_sub(alloc.iter().sum::<usize>());
    let mut order: Vec<usize> = (0..classes.len()).collect();
    order.sort_by(|&a, &b| {
        let fa = quotas[a] - quotas[a].floor();
        let fb = quotas[b] - quotas[b].floor();
        fb.partial_cmp(&fa).unwrap().then(a.cmp(&b))
    });
    for &i in order.iter().cycle() {
        if remaining == 0 {
            break;
        }
        if alloc[i] < counts[&classes[i]] {
            alloc[i] += 1;
            remaining -= 1;
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train_idx = Vec::new();
    let mut test_idx = Vec::new();
    for (ci, class) in classes.iter().enumerate() {
        let mut members: Vec<usize> =
            (0..n).filter(|&i| ds.y()[i] == *class).collect();
        members.shuffle(&mut rng);
        let (test_part, train_part) = members.split_at(alloc[ci]);
        test_idx.extend_from_slice(test_part);
        train_idx.extend_from_slice(train_part);
    }
    train_idx.sort_unstable();
    test_idx.sort_unstable();

    let manifest = SplitManifest {
        seed,
        train_fraction,
        train_indices: train_idx.clone(),
        test_indices: test_idx.clone(),
    };
    Ok((ds.subset(&train_idx)?, ds.subset(&test_idx)?, manifest))
}

/// Stratified k-fold indices: `k` disjoint (train, validation) pairs covering
/// all rows, fold sizes differing by at most one.
pub fn kfold(
    n: usize,
    k: usize,
    seed: u64,
    stratify_on: Option<&[Class]>,
) -> Result<Vec<(Vec<usize>, Vec<usize>)>> {
    if k < 2 {
        return Err(CoreError::InvalidParameter(format!("k must be >= 2, got {k}")));
    }
    if k > n {
        return Err(CoreError::InvalidParameter(format!("k={k} exceeds sample count {n}")));
    }
    if let Some(labels) = stratify_on {
        if labels.len() != n {
            return Err(CoreError::Data("label count mismatch in kfold".into()));
        }
        let mut counts: BTreeMap<Class, usize> = BTreeMap::new();
        for &c in labels {
            *counts.entry(c).or_insert(0) += 1;
        }
        if let Some((c, &m)) = counts.iter().find(|(_, &m)| m < k) {
            return Err(CoreError::Data(format!(
                "class {c} has {m} samples, fewer than k={k} folds"
            )));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fold_of = vec![0usize; n];
    // Rotating cursor spreads each class's remainder folds so global fold
    // sizes stay within one of each other.
    let mut cursor = 0usize;
    let groups: Vec<Vec<usize>> = match stratify_on {
        Some(labels) => {
            let mut classes: Vec<Class> = labels.to_vec();
            classes.sort_unstable();
            classes.dedup();
            classes
                .into_iter()
                .map(|c| (0..n).filter(|&i| labels[i] == c).collect())
                .collect()
        }
        None => vec![(0..n).collect()],
    };
    for mut members in groups {
        members.shuffle(&mut rng);
        for idx in members {
            fold_of[idx] = cursor % k;
            cursor += 1;
        }
    }

    let folds = (0..k)
        .map(|f| {
            let valid: Vec<usize> = (0..n).filter(|&i| fold_of[i] == f).collect();
            let train: Vec<usize> = (0..n).filter(|&i| fold_of[i] != f).collect();
            (train, valid)
        })
        .collect();
    Ok(folds)
}

/// Columns that precede the feature block in the canonical feature CSV.
pub const CSV_META_COLUMNS: [&str; 3] = ["image", "cell_id", "label"];

/// Writes the canonical feature CSV: `image,cell_id,label,<features...>`.
pub fn write_feature_csv<P: AsRef<Path>>(
    path: P,
    feature_names: &[String],
    rows: &[(String, String, Class, Vec<f64>)],
) -> Result<()> {
    let mut w = csv::Writer::from_path(path.as_ref())?;
    let mut header: Vec<String> = CSV_META_COLUMNS.iter().map(|s| s.to_string()).collect();
    header.extend(feature_names.iter().cloned());
    w.write_record(&header)?;
    for (image, cell_id, label, values) in rows {
        if values.len() != feature_names.len() {
            return Err(CoreError::Data(format!(
                "row {cell_id} has {} values, expected {}",
                values.len(),
                feature_names.len()
            )));
        }
        let mut rec = vec![image.clone(), cell_id.clone(), label.as_str().to_string()];
        rec.extend(values.iter().map(|v| format_float(*v)));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Shortest-roundtrip float formatting; stable across runs.
pub fn format_float(v: f64) -> String {
    let mut buf = ryu_format(v);
    if buf.ends_with(".0") {
        buf.truncate(buf.len() - 2);
    }
    buf
}

fn ryu_format(v: f64) -> String {
    // `{}` on f64 is shortest-roundtrip in Rust, which is what we want for
    // byte-identical reruns.
    format!("{v}")
}

/// Reads the canonical feature CSV into a [`Dataset`].
pub fn read_feature_csv<P: AsRef<Path>>(path: P) -> Result<Dataset> {
    let path = path.as_ref();
    let mut rdr = csv::Reader::from_path(path)?;
    let headers = rdr.headers()?.clone();
    if headers.len() < 4 {
        return Err(CoreError::Data(format!(
            "feature CSV needs at least 4 columns, got {}",
            headers.len()
        )));
    }
    for (i, expect) in CSV_META_COLUMNS.iter().enumerate() {
        if &headers[i] != *expect {
            return Err(CoreError::Data(format!(
                "column {i} must be {expect:?}, got {:?}",
                &headers[i]
            )));
        }
    }
    let feature_names: Vec<String> =
        headers.iter().skip(CSV_META_COLUMNS.len()).map(|s| s.to_string()).collect();

    let mut values = Vec::new();
    let mut labels = Vec::new();
    let mut row_ids = Vec::new();
    for record in rdr.records() {
        let record = record?;
        if record.len() != headers.len() {
            return Err(CoreError::Data(format!(
                "row {} has {} fields, expected {}",
                row_ids.len() + 1,
                record.len(),
                headers.len()
            )));
        }
        row_ids.push(format!("{}/{}", &record[0], &record[1]));
        labels.push(Class::parse(&record[2])?);
        for field in record.iter().skip(CSV_META_COLUMNS.len()) {
            let v: f64 = field
                .parse()
                .map_err(|_| CoreError::Data(format!("bad numeric field {field:?}")))?;
            values.push(v);
        }
    }
    let n = labels.len();
    let d = feature_names.len();
    let x = Array2::from_shape_vec((n, d), values)
        .map_err(|e| CoreError::Data(format!("csv shape error: {e}")))?;
    Dataset::new(
        x,
        labels,
        feature_names,
        Provenance { source: path.display().to_string(), row_ids },
    )
}

/// Column means, used by tests and reports.
pub fn column_means(x: &Array2<f64>) -> Array1<f64> {
    x.mean_axis(Axis(0)).unwrap_or_else(|| Array1::zeros(x.ncols()))
}
