//! Confusion matrices and the evaluation metrics used throughout:
//! support-weighted F-measure, SDS-score, class balance accuracy, balanced
//! accuracy and the multiclass Matthews correlation coefficient.

use serde::{Deserialize, Serialize};

use crate::data::Class;
use crate::error::CoreError;
use crate::Result;

/// k x k confusion counts; rows are true classes, columns predicted classes,
/// both in the order of `classes`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub classes: Vec<Class>,
    pub counts: Vec<Vec<u64>>,
}

/// Builds a confusion matrix from parallel label slices.
pub fn confusion(
    y_true: &[Class],
    y_pred: &[Class],
    classes: &[Class],
) -> Result<ConfusionMatrix> {
    if y_true.len() != y_pred.len() {
        return Err(CoreError::Data(format!(
            "label length mismatch: {} vs {}",
            y_true.len(),
            y_pred.len()
        )));
    }
    let index = |c: Class| -> Result<usize> {
        classes
            .iter()
            .position(|&k| k == c)
            .ok_or_else(|| CoreError::UnknownLabel(c.as_str().to_string()))
    };
    let k = classes.len();
    let mut counts = vec![vec![0u64; k]; k];
    for (&t, &p) in y_true.iter().zip(y_pred) {
        counts[index(t)?][index(p)?] += 1;
    }
    Ok(ConfusionMatrix { classes: classes.to_vec(), counts })
}

impl ConfusionMatrix {
    /// Builds directly from counts, validating shape.
    pub fn from_counts(classes: Vec<Class>, counts: Vec<Vec<u64>>) -> Result<Self> {
        let k = classes.len();
        if counts.len() != k || counts.iter().any(|r| r.len() != k) {
            return Err(CoreError::Data("confusion counts must be k x k".into()));
        }
        Ok(ConfusionMatrix { classes, counts })
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().map(|r| r.iter().sum::<u64>()).sum()
    }

    pub fn row_sums(&self) -> Vec<u64> {
        self.counts.iter().map(|r| r.iter().sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<u64> {
        let k = self.classes.len();
        (0..k).map(|j| self.counts.iter().map(|r| r[j]).sum()).collect()
    }

    fn require_nonempty(&self) -> Result<()> {
        if self.total() == 0 {
            return Err(CoreError::Data("empty confusion matrix".into()));
        }
        Ok(())
    }

    /// Overall accuracy: trace / total.
    pub fn accuracy(&self) -> Result<f64> {
        self.require_nonempty()?;
        let diag: u64 = (0..self.classes.len()).map(|i| self.counts[i][i]).sum();
        Ok(diag as f64 / self.total() as f64)
    }

    /// Per-class precision, recall and F1. A zero denominator yields 0 for
    /// the affected rate and an F1 of 0.
    pub fn per_class(&self) -> Vec<ClassMetrics> {
        let rows = self.row_sums();
        let cols = self.col_sums();
        self.classes
            .iter()
            .enumerate()
            .map(|(i, &class)| {
                let tp = self.counts[i][i] as f64;
                let precision = if cols[i] > 0 { tp / cols[i] as f64 } else { 0.0 };
                let recall = if rows[i] > 0 { tp / rows[i] as f64 } else { 0.0 };
                let f1 = if precision + recall > 0.0 {
                    2.0 * precision * recall / (precision + recall)
                } else {
                    0.0
                };
                ClassMetrics { class, precision, recall, f1, support: rows[i] }
            })
            .collect()
    }

    /// Support-weighted mean of per-class F1 scores. Classes with zero true
    /// support are excluded from the average.
    pub fn f_weighted(&self) -> Result<f64> {
        self.require_nonempty()?;
        let per = self.per_class();
        let total: u64 = per.iter().map(|m| m.support).sum();
        Ok(per.iter().map(|m| m.support as f64 * m.f1).sum::<f64>() / total as f64)
    }

    /// SDS-score: one minus the rate of confusions between the normal class
    /// and any deformed class. Confusions among deformed classes are not
    /// penalized, so for two classes this equals accuracy.
    pub fn sds_score(&self, normal: Class) -> Result<f64> {
        self.require_nonempty()?;
        let ni = self
            .classes
            .iter()
            .position(|&c| c == normal)
            .ok_or_else(|| CoreError::Data(format!("normal class {normal} absent")))?;
        let k = self.classes.len();
        let mut bad = 0u64;
        for j in 0..k {
            if j != ni {
                bad += self.counts[ni][j]; // normal predicted as deformed
                bad += self.counts[j][ni]; // deformed predicted as normal
            }
        }
        Ok(1.0 - bad as f64 / self.total() as f64)
    }

    /// Class balance accuracy: mean over classes of
    /// `counts[i][i] / max(row_sum_i, col_sum_i)`. Classes with zero row and
    /// column sum are skipped with a warning.
    pub fn cba(&self) -> Result<f64> {
        self.require_nonempty()?;
        let rows = self.row_sums();
        let cols = self.col_sums();
        let mut sum = 0.0;
        let mut used = 0usize;
        for i in 0..self.classes.len() {
            let denom = rows[i].max(cols[i]);
            if denom == 0 {
                log::warn!("class {} absent from truth and predictions; skipped in CBA", self.classes[i]);
                continue;
            }
            sum += self.counts[i][i] as f64 / denom as f64;
            used += 1;
        }
        Ok(sum / used as f64)
    }

    /// Balanced accuracy: mean per-class recall.
    pub fn balanced_accuracy(&self) -> Result<f64> {
        self.require_nonempty()?;
        let rows = self.row_sums();
        let mut sum = 0.0;
        let mut used = 0usize;
        for i in 0..self.classes.len() {
            if rows[i] == 0 {
                continue;
            }
            sum += self.counts[i][i] as f64 / rows[i] as f64;
            used += 1;
        }
        Ok(sum / used as f64)
    }

    /// Multiclass Matthews correlation coefficient (the R_K statistic):
    /// `(c*s - sum_k p_k t_k) / sqrt((s^2 - sum p_k^2)(s^2 - sum t_k^2))`
    /// with `c` the trace, `s` the total, `t` row sums and `p` column sums.
    /// Reduces to the classic MCC for two classes; a zero denominator yields 0.
    pub fn mcc(&self) -> Result<f64> {
        self.require_nonempty()?;
        let s = self.total() as f64;
        let c: u64 = (0..self.classes.len()).map(|i| self.counts[i][i]).sum();
        let t: Vec<f64> = self.row_sums().iter().map(|&v| v as f64).collect();
        let p: Vec<f64> = self.col_sums().iter().map(|&v| v as f64).collect();
        let num = c as f64 * s - p.iter().zip(&t).map(|(a, b)| a * b).sum::<f64>();
        let dp = s * s - p.iter().map(|v| v * v).sum::<f64>();
        let dt = s * s - t.iter().map(|v| v * v).sum::<f64>();
        let den = (dp * dt).sqrt();
        if den == 0.0 {
            return Ok(0.0);
        }
        Ok(num / den)
    }

    /// Full metric report with `normal` as the SDS reference class.
    pub fn report(&self, normal: Class) -> Result<MetricReport> {
        Ok(MetricReport {
            classes: self.classes.clone(),
            per_class: self.per_class(),
            accuracy: self.accuracy()?,
            f_weighted: self.f_weighted()?,
            sds: self.sds_score(normal)?,
            cba: self.cba()?,
            balanced_accuracy: self.balanced_accuracy()?,
            mcc: self.mcc()?,
            total: self.total(),
            counts: self.counts.clone(),
        })
    }

    /// CSV rendering mirroring the report layout: header row of predicted
    /// classes, one row per true class.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("true\\pred");
        for c in &self.classes {
            out.push(',');
            out.push_str(c.as_str());
        }
        out.push('\n');
        for (i, c) in self.classes.iter().enumerate() {
            out.push_str(c.as_str());
            for v in &self.counts[i] {
                out.push(',');
                out.push_str(&v.to_string());
            }
            out.push('\n');
        }
        out
    }
}

/// Precision/recall/F1 and support of one class.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub class: Class,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: u64,
}

/// All metrics of one evaluation, serializable into reports.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricReport {
    pub classes: Vec<Class>,
    pub per_class: Vec<ClassMetrics>,
    pub accuracy: f64,
    pub f_weighted: f64,
    pub sds: f64,
    pub cba: f64,
    pub balanced_accuracy: f64,
    pub mcc: f64,
    pub total: u64,
    pub counts: Vec<Vec<u64>>,
}

impl MetricReport {
    /// Plain-text table for terminal output.
    pub fn render_text(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!(
            "n={}  accuracy={:.4}  F(weighted)={:.4}  SDS={:.4}  CBA={:.4}  bAcc={:.4}  MCC={:.4}\n",
            self.total, self.accuracy, self.f_weighted, self.sds, self.cba,
            self.balanced_accuracy, self.mcc
        ));
        s.push_str("class  precision  recall     F1         support\n");
        for m in &self.per_class {
            s.push_str(&format!(
                "{:<6} {:<10.4} {:<10.4} {:<10.4} {}\n",
                m.class.as_str(),
                m.precision,
                m.recall,
                m.f1,
                m.support
            ));
        }
        s
    }
}

/// Scorer selector used by hyperparameter search and the experiment drivers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scorer {
    FWeighted,
    Sds,
}

impl Scorer {
    pub fn id(self) -> &'static str {
        match self {
            Scorer::FWeighted => "f_weighted",
            Scorer::Sds => "sds",
        }
    }

    /// Scores predictions; higher is better.
    pub fn score(self, y_true: &[Class], y_pred: &[Class], classes: &[Class]) -> Result<f64> {
        let cm = confusion(y_true, y_pred, classes)?;
        match self {
            Scorer::FWeighted => cm.f_weighted(),
            Scorer::Sds => cm.sds_score(Class::Circular),
        }
    }
}

impl std::str::FromStr for Scorer {
    type Err = CoreError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "f_weighted" | "f" => Ok(Scorer::FWeighted),
            "sds" => Ok(Scorer::Sds),
            other => Err(CoreError::InvalidParameter(format!("unknown scorer {other:?}"))),
        }
    }
}
