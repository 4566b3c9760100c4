//! `extract`: 121-feature CSV from segmented ROIs plus a label file.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rbc_core::data::{write_feature_csv, Class};
use rbc_core::features::{catalog, extract_all};
use rbc_core::imaging::sidecar::Sidecar;
use rbc_core::imaging::RgbImage;
use rbc_core::{CoreError, Result};

use crate::{EXIT_OK, EXIT_PARTIAL};

pub fn run(rois: &Path, labels_path: &Path, out: &Path) -> Result<u8> {
    let labels = load_labels(labels_path)?;
    let mut sidecars: Vec<PathBuf> = std::fs::read_dir(rois)?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.file_name().and_then(|n| n.to_str()).is_some_and(|n| n.ends_with(".cells.json")))
        .collect();
    sidecars.sort();
    if sidecars.is_empty() {
        return Err(CoreError::Data(format!("no .cells.json sidecars in {}", rois.display())));
    }

    let mut rows: Vec<(String, String, Class, Vec<f64>)> = Vec::new();
    let mut skipped = 0usize;
    let mut failed = 0usize;
    for sidecar_path in &sidecars {
        let text = std::fs::read_to_string(sidecar_path)?;
        let sidecar: Sidecar = serde_json::from_str(&text)?;
        let image_stem = Path::new(&sidecar.image)
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or(&sidecar.image)
            .to_string();
        for cell in &sidecar.cells {
            let Some(&label) = labels.get(&cell.cell_id) else {
                log::warn!("{}: unlabeled, skipped", cell.cell_id);
                skipped += 1;
                continue;
            };
            let roi_path = rois.join(format!("{}.png", cell.cell_id));
            let roi = RgbImage::load(&roi_path)?;
            let contour = cell.to_contour(roi)?;
            match extract_all(&contour) {
                Ok(fv) => {
                    rows.push((
                        image_stem.clone(),
                        cell.cell_id.clone(),
                        label,
                        fv.values().to_vec(),
                    ));
                }
                Err(e) => {
                    log::error!("{}: feature extraction failed: {e}", cell.cell_id);
                    failed += 1;
                }
            }
        }
    }

    write_feature_csv(out, catalog().names(), &rows)?;
    println!(
        "extracted {} cell(s) ({} unlabeled skipped, {} failed) -> {}",
        rows.len(),
        skipped,
        failed,
        out.display()
    );
    Ok(if failed > 0 { EXIT_PARTIAL } else { EXIT_OK })
}

/// Labels from a JSON object (`{"cell_id": "c", ...}`) or a two-column CSV
/// (`cell_id,label`, header optional).
fn load_labels(path: &Path) -> Result<BTreeMap<String, Class>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CoreError::Data(format!("labels {}: {e}", path.display())))?;
    let mut out = BTreeMap::new();
    if path.extension().and_then(|e| e.to_str()) == Some("json") {
        let map: BTreeMap<String, String> = serde_json::from_str(&text)?;
        for (id, label) in map {
            out.insert(id, Class::parse(&label)?);
        }
    } else {
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || (lineno == 0 && line.eq_ignore_ascii_case("cell_id,label")) {
                continue;
            }
            let (id, label) = line.split_once(',').ok_or_else(|| {
                CoreError::Data(format!("labels line {}: expected cell_id,label", lineno + 1))
            })?;
            out.insert(id.trim().to_string(), Class::parse(label)?);
        }
    }
    Ok(out)
}
