//! `segment`: batch segmentation of a directory of micrographs.

use std::path::{Path, PathBuf};

use rbc_core::imaging::sidecar::{Sidecar, SidecarCell};
use rbc_core::imaging::{segment_image, RgbImage, SegmentParams, SplitParams};
use rbc_core::{CoreError, Result};

use crate::report::write_json;
use crate::{EXIT_OK, EXIT_PARTIAL};

const IMAGE_EXTENSIONS: [&str; 4] = ["png", "jpg", "jpeg", "bmp"];

#[allow(clippy::too_many_arguments)]
pub fn run(
    input: &Path,
    out: &Path,
    sigma: f64,
    open_radius: usize,
    canny_low: f64,
    canny_high: f64,
    min_area: usize,
    invert: bool,
) -> Result<u8> {
    let params = SegmentParams {
        sigma,
        open_radius,
        canny_low,
        canny_high,
        min_area,
        invert,
        split: SplitParams::default(),
    };
    let images = list_images(input)?;
    std::fs::create_dir_all(out)?;

    let mut ok_count = 0usize;
    let mut err_count = 0usize;
    let mut cell_count = 0usize;
    for path in &images {
        match segment_one(path, out, &params) {
            Ok(cells) => {
                ok_count += 1;
                cell_count += cells;
            }
            Err(e) => {
                err_count += 1;
                log::error!("{}: {e}", path.display());
            }
        }
    }
    println!(
        "segmented {ok_count} image(s), {cell_count} cell(s), {err_count} failure(s)"
    );
    Ok(if err_count > 0 { EXIT_PARTIAL } else { EXIT_OK })
}

fn list_images(input: &Path) -> Result<Vec<PathBuf>> {
    if input.is_file() {
        return Ok(vec![input.to_path_buf()]);
    }
    if !input.is_dir() {
        return Err(CoreError::Data(format!("{} is not a file or directory", input.display())));
    }
    let mut images: Vec<PathBuf> = std::fs::read_dir(input)?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| {
            p.extension()
                .and_then(|e| e.to_str())
                .map(|e| IMAGE_EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()))
                .unwrap_or(false)
        })
        .collect();
    images.sort();
    Ok(images)
}

fn segment_one(path: &Path, out: &Path, params: &SegmentParams) -> Result<usize> {
    let stem = path
        .file_stem()
        .and_then(|s| s.to_str())
        .ok_or_else(|| CoreError::Data(format!("bad file name {}", path.display())))?;
    let img = RgbImage::load(path)?;
    let segmentation = segment_image(&img, params)?;
    for w in &segmentation.warnings {
        log::warn!("{}: {w}", path.display());
    }

    let mut cells = Vec::new();
    for (k, cell) in segmentation.contours.iter().enumerate() {
        let cell_id = format!("{stem}_cell{k}");
        cell.roi.save(out.join(format!("{cell_id}.png")))?;
        cells.push(SidecarCell::from_contour(cell, cell_id));
    }
    let count = cells.len();
    let sidecar = Sidecar {
        image: path.display().to_string(),
        params: params.clone(),
        threshold: segmentation.threshold,
        edge_pixels: segmentation.edge_pixels,
        warnings: segmentation.warnings.clone(),
        cells,
    };
    write_json(out.join(format!("{stem}.cells.json")), &sidecar)?;
    Ok(count)
}
