//! Micrograph segmentation: thresholding, smoothing, morphology, edge
//! detection, contour extraction and overlapping-cell splitting.
//!
//! All operations are pure functions of their inputs; images are immutable
//! after load, so per-image pipelines can run on independent workers.

mod canny;
mod contour;
mod ellipse;
pub mod geometry;
mod morphology;
mod otsu;
pub mod sidecar;
mod smooth;
mod split;

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::CoreError;
use crate::Result;

pub use canny::canny_edges;
pub use contour::extract_contours;
pub use ellipse::{fit_ellipse, Ellipse};
pub use morphology::{dilate, erode, morphological_open};
pub use otsu::{otsu_threshold, OtsuResult};
pub use smooth::gaussian_smooth;
pub use split::{split_overlapping, SplitParams};

/// 8-bit RGB image, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RgbImage {
    width: usize,
    height: usize,
    pixels: Vec<[u8; 3]>,
}

impl RgbImage {
    pub fn new(width: usize, height: usize, pixels: Vec<[u8; 3]>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(CoreError::Image("image dimensions must be positive".into()));
        }
        if pixels.len() != width * height {
            return Err(CoreError::Image(format!(
                "pixel count {} != {}x{}",
                pixels.len(),
                width,
                height
            )));
        }
        Ok(RgbImage { width, height, pixels })
    }

    pub fn filled(width: usize, height: usize, value: [u8; 3]) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn get(&self, x: usize, y: usize) -> [u8; 3] {
        self.pixels[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, v: [u8; 3]) {
        self.pixels[y * self.width + x] = v;
    }

    pub fn pixels(&self) -> &[[u8; 3]] {
        &self.pixels
    }

    /// Rec. 601 luminance conversion.
    pub fn to_gray(&self) -> GrayImage {
        let pixels = self
            .pixels
            .iter()
            .map(|[r, g, b]| {
                (0.299 * *r as f64 + 0.587 * *g as f64 + 0.114 * *b as f64).round() as u8
            })
            .collect();
        GrayImage { width: self.width, height: self.height, pixels }
    }

    /// Crops `rect`, clamped to the image bounds.
    pub fn crop(&self, rect: Rect) -> RgbImage {
        let x1 = rect.x.min(self.width.saturating_sub(1));
        let y1 = rect.y.min(self.height.saturating_sub(1));
        let x2 = (rect.x + rect.w).min(self.width);
        let y2 = (rect.y + rect.h).min(self.height);
        let (w, h) = (x2 - x1, y2 - y1);
        let mut pixels = Vec::with_capacity(w * h);
        for y in y1..y2 {
            pixels.extend_from_slice(&self.pixels[y * self.width + x1..y * self.width + x2]);
        }
        RgbImage { width: w, height: h, pixels }
    }

    pub fn load<P: AsRef<Path>>(path: P) -> Result<RgbImage> {
        let img = image::open(path.as_ref())?.to_rgb8();
        let (w, h) = (img.width() as usize, img.height() as usize);
        let pixels = img.pixels().map(|p| [p.0[0], p.0[1], p.0[2]]).collect();
        RgbImage::new(w, h, pixels)
    }

    pub fn save<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        let mut buf = image::RgbImage::new(self.width as u32, self.height as u32);
        for (i, p) in self.pixels.iter().enumerate() {
            let (x, y) = ((i % self.width) as u32, (i / self.width) as u32);
            buf.put_pixel(x, y, image::Rgb(*p));
        }
        buf.save(path.as_ref())?;
        Ok(())
    }
}

/// 8-bit luminance image, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(CoreError::Image("image dimensions must be positive".into()));
        }
        if pixels.len() != width * height {
            return Err(CoreError::Image(format!(
                "pixel count {} != {}x{}",
                pixels.len(),
                width,
                height
            )));
        }
        Ok(GrayImage { width, height, pixels })
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, v: u8) {
        self.pixels[y * self.width + x] = v;
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    /// Edge-replicated sample, valid for any integer offset.
    pub fn get_clamped(&self, x: isize, y: isize) -> u8 {
        let x = x.clamp(0, self.width as isize - 1) as usize;
        let y = y.clamp(0, self.height as isize - 1) as usize;
        self.get(x, y)
    }

    pub fn transpose(&self) -> GrayImage {
        let mut pixels = vec![0u8; self.width * self.height];
        for y in 0..self.height {
            for x in 0..self.width {
                pixels[x * self.height + y] = self.get(x, y);
            }
        }
        GrayImage { width: self.height, height: self.width, pixels }
    }
}

/// Boolean foreground mask, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryImage {
    width: usize,
    height: usize,
    pixels: Vec<bool>,
}

impl BinaryImage {
    pub fn new(width: usize, height: usize, pixels: Vec<bool>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(CoreError::Image("image dimensions must be positive".into()));
        }
        if pixels.len() != width * height {
            return Err(CoreError::Image(format!(
                "pixel count {} != {}x{}",
                pixels.len(),
                width,
                height
            )));
        }
        Ok(BinaryImage { width, height, pixels })
    }

    pub fn empty(width: usize, height: usize) -> Result<Self> {
        Self::new(width, height, vec![false; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.pixels[y * self.width + x]
    }

    /// Background for out-of-bounds coordinates.
    pub fn get_or_bg(&self, x: isize, y: isize) -> bool {
        if x < 0 || y < 0 || x >= self.width as isize || y >= self.height as isize {
            false
        } else {
            self.get(x as usize, y as usize)
        }
    }

    pub fn set(&mut self, x: usize, y: usize, v: bool) {
        self.pixels[y * self.width + x] = v;
    }

    pub fn pixels(&self) -> &[bool] {
        &self.pixels
    }

    pub fn count(&self) -> usize {
        self.pixels.iter().filter(|&&p| p).count()
    }

    pub fn invert(&self) -> BinaryImage {
        BinaryImage {
            width: self.width,
            height: self.height,
            pixels: self.pixels.iter().map(|p| !p).collect(),
        }
    }

    /// True if `other` covers every foreground pixel of `self`.
    pub fn subset_of(&self, other: &BinaryImage) -> bool {
        self.width == other.width
            && self.height == other.height
            && self.pixels.iter().zip(&other.pixels).all(|(a, b)| !*a || *b)
    }
}

/// Tight bounding box in image coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rect {
    pub x: usize,
    pub y: usize,
    pub w: usize,
    pub h: usize,
}

/// One segmented cell: closed boundary, local mask, bounding box and the RGB
/// crop of the region.
#[derive(Debug, Clone)]
pub struct CellContour {
    /// Closed boundary in absolute image coordinates; the last point connects
    /// back to the first.
    pub points: Vec<[f64; 2]>,
    /// Foreground mask local to `bbox` (dimensions `bbox.w` x `bbox.h`).
    pub mask: BinaryImage,
    pub bbox: Rect,
    /// RGB crop of `bbox` from the source image. When no source is available
    /// the crop is rendered from the mask (foreground dark on white).
    pub roi: RgbImage,
    pub is_split_from_cluster: bool,
    pub touches_border: bool,
}

impl CellContour {
    /// Enclosed area in pixels.
    pub fn area(&self) -> usize {
        self.mask.count()
    }

    /// Centroid of the mask in absolute image coordinates.
    pub fn centroid(&self) -> [f64; 2] {
        let mut sx = 0.0;
        let mut sy = 0.0;
        let mut n = 0.0;
        for y in 0..self.mask.height() {
            for x in 0..self.mask.width() {
                if self.mask.get(x, y) {
                    sx += (self.bbox.x + x) as f64;
                    sy += (self.bbox.y + y) as f64;
                    n += 1.0;
                }
            }
        }
        [sx / n, sy / n]
    }

    /// Replaces the ROI with the crop of `src` under this contour's bbox.
    pub fn attach_roi(&mut self, src: &RgbImage) {
        self.roi = src.crop(self.bbox);
    }

    /// Renders a black-on-white ROI from the mask. Used when no color source
    /// exists (synthetic masks in tests, mask-only workflows).
    pub fn render_mask_roi(&mut self) {
        let mut roi = RgbImage::filled(self.mask.width(), self.mask.height(), [255, 255, 255])
            .expect("mask dimensions are positive");
        for y in 0..self.mask.height() {
            for x in 0..self.mask.width() {
                if self.mask.get(x, y) {
                    roi.set(x, y, [80, 80, 80]);
                }
            }
        }
        self.roi = roi;
    }
}

/// Parameters of the full segmentation pipeline. Defaults target roughly
/// 80 px diameter erythrocytes at 100x magnification.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SegmentParams {
    /// Gaussian smoothing sigma in pixels.
    pub sigma: f64,
    /// Disc radius of the morphological opening.
    pub open_radius: usize,
    /// Canny hysteresis thresholds on the 0-255 intensity scale.
    pub canny_low: f64,
    pub canny_high: f64,
    /// Minimum cell area in px^2.
    pub min_area: usize,
    /// Foreground polarity: stained cells darker than background by default;
    /// set to true for stains where cells are brighter.
    pub invert: bool,
    /// Cluster splitting parameters.
    pub split: SplitParams,
}

impl Default for SegmentParams {
    fn default() -> Self {
        SegmentParams {
            sigma: 1.0,
            open_radius: 2,
            canny_low: 50.0,
            canny_high: 150.0,
            min_area: 200,
            invert: false,
            split: SplitParams::default(),
        }
    }
}

/// Output of [`segment_image`].
#[derive(Debug, Clone)]
pub struct Segmentation {
    pub contours: Vec<CellContour>,
    /// Otsu threshold chosen for the image.
    pub threshold: u8,
    /// Number of Canny edge pixels, kept as a diagnostic.
    pub edge_pixels: usize,
    pub warnings: Vec<String>,
}

/// Full pipeline: grayscale, Gaussian smoothing, Otsu binarization,
/// morphological opening, contour extraction and cluster splitting. The Canny
/// edge map is computed on the smoothed image and reported as a diagnostic.
pub fn segment_image(img: &RgbImage, params: &SegmentParams) -> Result<Segmentation> {
    let gray = img.to_gray();
    let smoothed = gaussian_smooth(&gray, params.sigma)?;
    let otsu = otsu_threshold(&smoothed);
    let mut warnings = Vec::new();
    if otsu.degenerate {
        warnings.push("degenerate histogram: constant image, empty foreground".to_string());
    }
    let mask = if params.invert { otsu.mask.invert() } else { otsu.mask.clone() };
    let opened = morphological_open(&mask, params.open_radius)?;
    let edges = canny_edges(&smoothed, params.canny_low, params.canny_high)?;

    let mut contours = extract_contours(&opened, params.min_area);
    for c in &mut contours {
        c.attach_roi(img);
    }

    // Median area of all regions gates the cluster splitter.
    let mut areas: Vec<usize> = contours.iter().map(|c| c.area()).collect();
    areas.sort_unstable();
    let median_area =
        if areas.is_empty() { 0.0 } else { areas[areas.len() / 2] as f64 };
    let mut split_params = params.split.clone();
    split_params.median_cell_area = Some(median_area);

    let mut out = Vec::new();
    for c in contours {
        let pieces = split_overlapping(&c, &split_params);
        for mut piece in pieces {
            piece.attach_roi(img);
            out.push(piece);
        }
    }

    Ok(Segmentation {
        contours: out,
        threshold: otsu.threshold,
        edge_pixels: edges.count(),
        warnings,
    })
}
