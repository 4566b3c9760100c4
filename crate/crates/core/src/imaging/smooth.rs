//! Gaussian noise reduction.

use super::GrayImage;
use crate::error::CoreError;
use crate::Result;

/// Convolves with a truncated, normalized Gaussian (radius `ceil(3*sigma)`),
/// replicating edge pixels at the border. Computation runs in f64 with the
/// two separable passes fused before quantization, so total mass is preserved
/// up to rounding.
pub fn gaussian_smooth(img: &GrayImage, sigma: f64) -> Result<GrayImage> {
    if !(sigma > 0.0) {
        return Err(CoreError::InvalidParameter(format!("sigma must be > 0, got {sigma}")));
    }
    let radius = (3.0 * sigma).ceil() as isize;
    let kernel = gaussian_kernel(sigma, radius);

    let (w, h) = (img.width(), img.height());
    // horizontal pass, kept in f64
    let mut tmp = vec![0.0f64; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (k, &kv) in kernel.iter().enumerate() {
                let sx = x as isize + k as isize - radius;
                acc += kv * img.get_clamped(sx, y as isize) as f64;
            }
            tmp[y * w + x] = acc;
        }
    }
    // vertical pass + quantization
    let sample = |x: usize, y: isize| -> f64 {
        let y = y.clamp(0, h as isize - 1) as usize;
        tmp[y * w + x]
    };
    let mut out = vec![0u8; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (k, &kv) in kernel.iter().enumerate() {
                let sy = y as isize + k as isize - radius;
                acc += kv * sample(x, sy);
            }
            out[y * w + x] = acc.round().clamp(0.0, 255.0) as u8;
        }
    }
    GrayImage::new(w, h, out)
}

/// Normalized 1-D Gaussian taps over `[-radius, radius]`.
pub(crate) fn gaussian_kernel(sigma: f64, radius: isize) -> Vec<f64> {
    let mut kernel: Vec<f64> = (-radius..=radius)
        .map(|i| (-0.5 * (i as f64 / sigma).powi(2)).exp())
        .collect();
    let sum: f64 = kernel.iter().sum();
    for v in &mut kernel {
        *v /= sum;
    }
    kernel
}
