//! Per-image JSON sidecar: the serialized form of a segmentation result.
//! Masks are stored as row-major run lengths (background count first) so a
//! cell can be reconstructed exactly from sidecar + ROI crop.

use serde::{Deserialize, Serialize};

use super::{BinaryImage, CellContour, Rect, RgbImage, SegmentParams};
use crate::error::CoreError;
use crate::Result;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Sidecar {
    pub image: String,
    pub params: SegmentParams,
    pub threshold: u8,
    pub edge_pixels: usize,
    pub warnings: Vec<String>,
    pub cells: Vec<SidecarCell>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SidecarCell {
    pub cell_id: String,
    pub bbox: Rect,
    pub area: usize,
    pub is_split_from_cluster: bool,
    pub touches_border: bool,
    pub points: Vec<[f64; 2]>,
    /// Alternating run lengths over the bbox-local mask, background first.
    pub mask_rle: Vec<u32>,
}

/// Run-length encodes a mask row-major, starting with a background run
/// (possibly zero).
pub fn encode_rle(mask: &BinaryImage) -> Vec<u32> {
    let mut runs = Vec::new();
    let mut current = false;
    let mut count = 0u32;
    for &p in mask.pixels() {
        if p == current {
            count += 1;
        } else {
            runs.push(count);
            current = p;
            count = 1;
        }
    }
    runs.push(count);
    runs
}

pub fn decode_rle(runs: &[u32], width: usize, height: usize) -> Result<BinaryImage> {
    let mut pixels = Vec::with_capacity(width * height);
    let mut value = false;
    for &run in runs {
        for _ in 0..run {
            pixels.push(value);
        }
        value = !value;
    }
    if pixels.len() != width * height {
        return Err(CoreError::Data(format!(
            "mask RLE decodes to {} pixels, expected {}",
            pixels.len(),
            width * height
        )));
    }
    BinaryImage::new(width, height, pixels)
}

impl SidecarCell {
    pub fn from_contour(cell: &CellContour, cell_id: String) -> SidecarCell {
        SidecarCell {
            cell_id,
            bbox: cell.bbox,
            area: cell.area(),
            is_split_from_cluster: cell.is_split_from_cluster,
            touches_border: cell.touches_border,
            points: cell.points.clone(),
            mask_rle: encode_rle(&cell.mask),
        }
    }

    /// Rebuilds the in-memory cell; `roi` is the crop loaded from disk.
    pub fn to_contour(&self, roi: RgbImage) -> Result<CellContour> {
        let mask = decode_rle(&self.mask_rle, self.bbox.w, self.bbox.h)?;
        if roi.width() != self.bbox.w || roi.height() != self.bbox.h {
            return Err(CoreError::Data(format!(
                "ROI {}x{} does not match bbox {}x{}",
                roi.width(),
                roi.height(),
                self.bbox.w,
                self.bbox.h
            )));
        }
        Ok(CellContour {
            points: self.points.clone(),
            mask,
            bbox: self.bbox,
            roi,
            is_split_from_cluster: self.is_split_from_cluster,
            touches_border: self.touches_border,
        })
    }
}
