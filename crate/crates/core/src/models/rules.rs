//! Rule-based baselines driven by single shape descriptors. Thresholds left
//! unset in the spec are calibrated on the training data by maximizing the
//! SDS-score over a deterministic candidate grid.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::data::{Class, Dataset};
use crate::error::CoreError;
use crate::metrics::Scorer;
use crate::Result;

use super::{AsakuraParams, RuleParams};

/// Three-class rule on eccentricity plus area/perimeter deviation:
/// elongated when the axis ratio is low; otherwise "other" when area or
/// perimeter deviates too far from the normal-class median; circular
/// otherwise.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AsakuraFitted {
    pub esf_threshold: f64,
    pub deviation_threshold: f64,
    pub esf_column: usize,
    pub area_column: usize,
    pub perimeter_column: usize,
    /// Robust location/scale of the normal class on train: median and IQR of
    /// (area, perimeter).
    pub area_center: f64,
    pub area_scale: f64,
    pub perimeter_center: f64,
    pub perimeter_scale: f64,
    pub class_indices: AsakuraClasses,
}

/// Class-list positions of the three predicted labels; `other` is absent
/// when fitted on binary data.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AsakuraClasses {
    pub circular: usize,
    pub elongated: usize,
    pub other: Option<usize>,
}

/// Binary threshold gate on one scalar feature: at or above the threshold is
/// the normal (circular) class.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ThresholdFitted {
    pub feature_column: usize,
    pub threshold: f64,
    pub normal_index: usize,
    pub abnormal_index: usize,
}

fn find_column(names: &[String], wanted: &str) -> Result<usize> {
    names.iter().position(|n| n == wanted).ok_or_else(|| {
        CoreError::Data(format!("rule baseline needs feature {wanted:?}, not present"))
    })
}

fn class_position(classes: &[Class], c: Class) -> Result<usize> {
    classes
        .iter()
        .position(|&k| k == c)
        .ok_or_else(|| CoreError::Data(format!("class {c} absent from training data")))
}

fn sorted(values: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut v: Vec<f64> = values.collect();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return 0.0;
    }
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let t = pos - lo as f64;
    sorted[lo] * (1.0 - t) + sorted[hi] * t
}

/// Evenly spaced quantile candidates of a column, deduplicated.
fn candidate_thresholds(column: &[f64]) -> Vec<f64> {
    let s = sorted(column.iter().copied());
    let mut out: Vec<f64> = (0..=100).map(|i| quantile(&s, i as f64 / 100.0)).collect();
    out.dedup();
    out
}

pub fn fit_asakura(
    params: &AsakuraParams,
    train: &Dataset,
    classes: &[Class],
) -> Result<AsakuraFitted> {
    let names = train.feature_names();
    let esf_column = find_column(names, "Eccentricity")?;
    let area_column = find_column(names, "Area")?;
    let perimeter_column = find_column(names, "Perimeter")?;
    let circular = class_position(classes, Class::Circular)?;
    let elongated = class_position(classes, Class::Elongated)?;
    let other = classes.iter().position(|&k| k == Class::Other);

    // Robust statistics of the normal class.
    let normal_rows: Vec<usize> = (0..train.n_samples())
        .filter(|&i| train.y()[i] == Class::Circular)
        .collect();
    let stat = |col: usize| -> (f64, f64) {
        let s = sorted(normal_rows.iter().map(|&i| train.x()[(i, col)]));
        let median = quantile(&s, 0.5);
        let iqr = quantile(&s, 0.75) - quantile(&s, 0.25);
        (median, if iqr > 0.0 { iqr } else { 1.0 })
    };
    let (area_center, area_scale) = stat(area_column);
    let (perimeter_center, perimeter_scale) = stat(perimeter_column);

    let esf_candidates = match params.esf_threshold {
        Some(t) => vec![t],
        None => candidate_thresholds(
            &train.x().column(esf_column).iter().copied().collect::<Vec<_>>(),
        ),
    };
    let dev_candidates = match params.deviation_threshold {
        Some(t) => vec![t],
        None => {
            if other.is_some() {
                (1..=40).map(|i| i as f64 * 0.25).collect()
            } else {
                vec![f64::INFINITY] // no "other" class: deviation gate off
            }
        }
    };

    let mut fitted = AsakuraFitted {
        esf_threshold: esf_candidates[0],
        deviation_threshold: dev_candidates[0],
        esf_column,
        area_column,
        perimeter_column,
        area_center,
        area_scale,
        perimeter_center,
        perimeter_scale,
        class_indices: AsakuraClasses { circular, elongated, other },
    };

    // 2-D grid calibration: maximize SDS on the training data; SDS ties
    // (it forgives confusions among the deformed classes) break by accuracy,
    // then by the earliest candidate.
    let mut best_score = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    let mut best = (fitted.esf_threshold, fitted.deviation_threshold);
    for &esf_t in &esf_candidates {
        for &dev_t in &dev_candidates {
            fitted.esf_threshold = esf_t;
            fitted.deviation_threshold = dev_t;
            let pred_idx = predict_asakura(&fitted, train.x());
            let pred: Vec<Class> = pred_idx.iter().map(|&i| classes[i]).collect();
            let sds = Scorer::Sds.score(train.y(), &pred, classes)?;
            let acc = pred.iter().zip(train.y()).filter(|(a, b)| a == b).count() as f64
                / pred.len() as f64;
            if (sds, acc) > best_score {
                best_score = (sds, acc);
                best = (esf_t, dev_t);
            }
        }
    }
    fitted.esf_threshold = best.0;
    fitted.deviation_threshold = best.1;
    Ok(fitted)
}

pub fn predict_asakura(fitted: &AsakuraFitted, x: &Array2<f64>) -> Vec<usize> {
    x.rows()
        .into_iter()
        .map(|row| {
            let esf = row[fitted.esf_column];
            if esf < fitted.esf_threshold {
                return fitted.class_indices.elongated;
            }
            if let Some(other) = fitted.class_indices.other {
                let dev_area =
                    (row[fitted.area_column] - fitted.area_center).abs() / fitted.area_scale;
                let dev_per = (row[fitted.perimeter_column] - fitted.perimeter_center).abs()
                    / fitted.perimeter_scale;
                if dev_area.max(dev_per) > fitted.deviation_threshold {
                    return other;
                }
            }
            fitted.class_indices.circular
        })
        .collect()
}

/// Calibrates (or adopts) the scalar gate for the circularity and
/// eccentricity baselines.
pub fn fit_threshold_rule(
    params: &RuleParams,
    train: &Dataset,
    classes: &[Class],
    feature: &str,
) -> Result<ThresholdFitted> {
    let feature_column = find_column(train.feature_names(), feature)?;
    let normal_index = class_position(classes, Class::Circular)?;
    // The binary experiments frame "abnormal" as elongated.
    let abnormal_index = class_position(classes, Class::Elongated)?;

    let column: Vec<f64> = train.x().column(feature_column).iter().copied().collect();
    let candidates = match params.threshold {
        Some(t) => vec![t],
        None => candidate_thresholds(&column),
    };
    let mut fitted = ThresholdFitted {
        feature_column,
        threshold: candidates[0],
        normal_index,
        abnormal_index,
    };
    let mut best_score = f64::NEG_INFINITY;
    let mut best_t = fitted.threshold;
    for &t in &candidates {
        fitted.threshold = t;
        let pred_idx = predict_threshold(&fitted, train.x());
        let pred: Vec<Class> = pred_idx.iter().map(|&i| classes[i]).collect();
        let score = Scorer::Sds.score(train.y(), &pred, classes)?;
        if score > best_score {
            best_score = score;
            best_t = t;
        }
    }
    fitted.threshold = best_t;
    Ok(fitted)
}

pub fn predict_threshold(fitted: &ThresholdFitted, x: &Array2<f64>) -> Vec<usize> {
    x.rows()
        .into_iter()
        .map(|row| {
            if row[fitted.feature_column] >= fitted.threshold {
                fitted.normal_index
            } else {
                fitted.abnormal_index
            }
        })
        .collect()
}
