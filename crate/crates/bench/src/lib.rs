//! Shared fixtures for the benchmark targets.

use rbc_core::data::{Class, Dataset, Provenance};
use rbc_core::imaging::{BinaryImage, GrayImage, RgbImage};

/// Deterministic pseudo-random byte stream (splitmix-style), good enough for
/// benchmark inputs without pulling RNG setup into the measured closures.
pub fn byte_stream(len: usize, mut state: u64) -> Vec<u8> {
    let mut out = Vec::with_capacity(len);
    for _ in 0..len {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        out.push((state >> 33) as u8);
    }
    out
}

pub fn gray_image(w: usize, h: usize, seed: u64) -> GrayImage {
    GrayImage::new(w, h, byte_stream(w * h, seed)).unwrap()
}

/// A smear-like RGB frame with dark discs on a light background.
pub fn synthetic_smear(w: usize, h: usize) -> RgbImage {
    let mut img = RgbImage::filled(w, h, [233, 226, 230]).unwrap();
    let mut k = 0usize;
    for cy in (30..h - 30).step_by(70) {
        for cx in (30..w - 30).step_by(70) {
            let r = 18.0 + (k % 3) as f64 * 3.0;
            k += 1;
            for y in cy.saturating_sub(25)..(cy + 25).min(h) {
                for x in cx.saturating_sub(25)..(cx + 25).min(w) {
                    if ((x as f64 - cx as f64).powi(2) + (y as f64 - cy as f64).powi(2))
                        <= r * r
                    {
                        img.set(x, y, [118, 62, 92]);
                    }
                }
            }
        }
    }
    img
}

pub fn disc_mask(n: usize, r: f64) -> BinaryImage {
    let c = n as f64 / 2.0;
    let mut mask = BinaryImage::empty(n, n).unwrap();
    for y in 0..n {
        for x in 0..n {
            if (x as f64 - c).powi(2) + (y as f64 - c).powi(2) <= r * r {
                mask.set(x, y, true);
            }
        }
    }
    mask
}

/// Three-class Gaussian blob table of the given size.
pub fn blob_dataset(n_per_class: usize, d: usize, seed: u64) -> Dataset {
    let bytes = byte_stream(3 * n_per_class * d * 2, seed);
    let mut rows = Vec::new();
    let mut y = Vec::new();
    let centers = [0.0f64, 6.0, 12.0];
    let classes = [Class::Circular, Class::Elongated, Class::Other];
    let mut cursor = 0usize;
    for (c, &center) in centers.iter().enumerate() {
        for _ in 0..n_per_class {
            let mut row = Vec::with_capacity(d);
            for _ in 0..d {
                let u = bytes[cursor] as f64 / 255.0 + bytes[cursor + 1] as f64 / 255.0;
                cursor += 2;
                row.push(center + u - 1.0);
            }
            rows.push(row);
            y.push(classes[c]);
        }
    }
    let x = ndarray::Array2::from_shape_vec((rows.len(), d), rows.concat()).unwrap();
    let names = (0..d).map(|i| format!("f{i}")).collect();
    Dataset::new(x, y, names, Provenance::default()).unwrap()
}
