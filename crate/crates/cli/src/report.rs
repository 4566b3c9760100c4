//! Report plumbing: config hashes, deterministic JSON/text emission and the
//! saved-model bundle format.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use rbc_core::data::ScalerStats;
use rbc_core::metrics::MetricReport;
use rbc_core::models::TrainedModel;
use rbc_core::{CoreError, Result};

/// Hex SHA-256 of the canonical config JSON.
pub fn config_hash(canonical_json: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(canonical_json.as_bytes());
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Provenance header embedded in every experiment report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportHeader {
    pub config_hash: String,
    pub seed: u64,
    pub catalog_version: String,
}

impl ReportHeader {
    pub fn new(canonical_config: &str, seed: u64) -> ReportHeader {
        ReportHeader {
            config_hash: config_hash(canonical_config),
            seed,
            catalog_version: rbc_core::CATALOG_VERSION.to_string(),
        }
    }
}

/// Writes pretty JSON with a trailing newline (byte-stable across runs).
pub fn write_json<T: Serialize, P: AsRef<Path>>(path: P, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path.as_ref(), text)?;
    Ok(())
}

pub fn write_text<P: AsRef<Path>>(path: P, text: &str) -> Result<()> {
    std::fs::write(path.as_ref(), text)?;
    Ok(())
}

/// A trained model together with the scaler fitted on its training data;
/// the on-disk artifact of `train`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelBundle {
    pub format_version: u32,
    pub scaler: ScalerStats,
    pub model: TrainedModel,
}

pub const BUNDLE_FORMAT_VERSION: u32 = 1;

impl ModelBundle {
    pub fn save<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        write_json(path, self)
    }

    pub fn load<P: AsRef<Path>>(path: P) -> Result<ModelBundle> {
        let text = std::fs::read_to_string(path.as_ref())?;
        let bundle: ModelBundle = serde_json::from_str(&text)?;
        if bundle.format_version != BUNDLE_FORMAT_VERSION {
            return Err(CoreError::Model(format!(
                "unsupported bundle version {}",
                bundle.format_version
            )));
        }
        Ok(bundle)
    }
}

/// Fixed-width metric row used by the text tables.
pub fn metric_row(label: &str, m: &MetricReport) -> String {
    format!(
        "{label:<24} F={:<8.4} SDS={:<8.4} CBA={:<8.4} bAcc={:<8.4} MCC={:<8.4} acc={:<8.4}\n",
        m.f_weighted, m.sds, m.cba, m.balanced_accuracy, m.mcc, m.accuracy
    )
}

/// Minimal SVG polyline plot of a score-vs-size curve.
pub fn curve_svg(curve: &[(usize, f64)], title: &str) -> String {
    let (w, h, pad) = (640.0, 360.0, 40.0);
    let max_x = curve.iter().map(|(s, _)| *s).max().unwrap_or(1) as f64;
    let (min_y, max_y) = curve.iter().fold((1.0f64, 0.0f64), |(lo, hi), (_, v)| {
        (lo.min(*v), hi.max(*v))
    });
    let span_y = (max_y - min_y).max(1e-6);
    let map = |s: usize, v: f64| -> (f64, f64) {
        (
            pad + (s as f64 / max_x) * (w - 2.0 * pad),
            h - pad - ((v - min_y) / span_y) * (h - 2.0 * pad),
        )
    };
    let points: Vec<String> = curve
        .iter()
        .map(|&(s, v)| {
            let (x, y) = map(s, v);
            format!("{x:.1},{y:.1}")
        })
        .collect();
    format!(
        concat!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" ",
            "viewBox=\"0 0 {w} {h}\">\n",
            "<rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n",
            "<text x=\"{tx}\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">{title}</text>\n",
            "<polyline fill=\"none\" stroke=\"#2060c0\" stroke-width=\"1.5\" points=\"{points}\"/>\n",
            "<text x=\"{tx}\" y=\"{by}\" text-anchor=\"middle\" font-size=\"11\">features</text>\n",
            "</svg>\n"
        ),
        w = w,
        h = h,
        tx = w / 2.0,
        by = h - 8.0,
        title = title,
        points = points.join(" ")
    )
}
