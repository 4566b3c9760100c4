//! Automatic threshold selection by maximizing between-class variance.

use super::{BinaryImage, GrayImage};

/// Result of [`otsu_threshold`].
#[derive(Debug, Clone)]
pub struct OtsuResult {
    /// Chosen threshold; pixels `<= threshold` form the dark class.
    pub threshold: u8,
    /// Foreground mask (dark class). Empty when `degenerate`.
    pub mask: BinaryImage,
    /// Set for constant images, where no threshold separates anything.
    pub degenerate: bool,
}

/// Picks the threshold maximizing between-class variance over the 256-bin
/// histogram; ties break toward the lowest threshold. Foreground is the dark
/// class (stained cells are darker than the background).
///
/// A constant image yields its own value as the threshold, an all-background
/// mask and the `degenerate` flag.
pub fn otsu_threshold(img: &GrayImage) -> OtsuResult {
    let mut hist = [0u64; 256];
    for &p in img.pixels() {
        hist[p as usize] += 1;
    }
    let total = img.pixels().len() as f64;

    let nonzero = hist.iter().filter(|&&c| c > 0).count();
    if nonzero <= 1 {
        let value = hist.iter().position(|&c| c > 0).unwrap_or(0) as u8;
        log::warn!("constant image (value {value}); returning empty foreground");
        return OtsuResult {
            threshold: value,
            mask: BinaryImage::empty(img.width(), img.height())
                .expect("source image has positive dimensions"),
            degenerate: true,
        };
    }

    let total_sum: f64 = hist.iter().enumerate().map(|(v, &c)| v as f64 * c as f64).sum();
    let mut best_t = 0u8;
    let mut best_var = f64::NEG_INFINITY;
    let mut w0 = 0.0;
    let mut sum0 = 0.0;
    for t in 0..=255usize {
        w0 += hist[t] as f64;
        sum0 += t as f64 * hist[t] as f64;
        let w1 = total - w0;
        if w0 == 0.0 || w1 == 0.0 {
            continue;
        }
        let mu0 = sum0 / w0;
        let mu1 = (total_sum - sum0) / w1;
        let var = w0 * w1 * (mu0 - mu1) * (mu0 - mu1);
        if var > best_var {
            best_var = var;
            best_t = t as u8;
        }
    }

    let pixels = img.pixels().iter().map(|&p| p <= best_t).collect();
    OtsuResult {
        threshold: best_t,
        mask: BinaryImage::new(img.width(), img.height(), pixels)
            .expect("dimensions match source image"),
        degenerate: false,
    }
}
