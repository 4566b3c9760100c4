//! Canny edge detection: Sobel gradients, non-maximum suppression, double
//! threshold and hysteresis tracking.

use std::collections::VecDeque;

use super::{BinaryImage, GrayImage};
use crate::error::CoreError;
use crate::Result;

/// Detects edges with hysteresis thresholds given on the 0-255 intensity
/// scale (the Sobel magnitude is divided by 4, the response of a full-range
/// step edge). Output edges are one pixel wide along the gradient direction.
pub fn canny_edges(img: &GrayImage, low: f64, high: f64) -> Result<BinaryImage> {
    if !(0.0 <= low && low < high) {
        return Err(CoreError::InvalidParameter(format!(
            "thresholds must satisfy 0 <= low < high, got ({low}, {high})"
        )));
    }
    let (w, h) = (img.width(), img.height());

    // Sobel gradients; border pixels keep zero gradient.
    let mut gx = vec![0i32; w * h];
    let mut gy = vec![0i32; w * h];
    for y in 1..h.saturating_sub(1) {
        for x in 1..w.saturating_sub(1) {
            let p = |dx: isize, dy: isize| -> i32 {
                img.get((x as isize + dx) as usize, (y as isize + dy) as usize) as i32
            };
            gx[y * w + x] = -p(-1, -1) - 2 * p(-1, 0) - p(-1, 1)
                + p(1, -1)
                + 2 * p(1, 0)
                + p(1, 1);
            gy[y * w + x] = -p(-1, -1) - 2 * p(0, -1) - p(1, -1)
                + p(-1, 1)
                + 2 * p(0, 1)
                + p(1, 1);
        }
    }
    let mag: Vec<f64> = gx
        .iter()
        .zip(&gy)
        .map(|(&a, &b)| ((a * a + b * b) as f64).sqrt() / 4.0)
        .collect();

    // Non-maximum suppression. The comparison is strict toward the positive
    // gradient direction and non-strict toward the negative one, which thins
    // two-pixel plateaus (an ideal step edge) down to one pixel.
    let mut thin = vec![0.0f64; w * h];
    for y in 1..h.saturating_sub(1) {
        for x in 1..w.saturating_sub(1) {
            let m = mag[y * w + x];
            if m == 0.0 {
                continue;
            }
            let angle = (gy[y * w + x] as f64).atan2(gx[y * w + x] as f64);
            let deg = angle.to_degrees().rem_euclid(180.0);
            let (dx, dy): (isize, isize) = if !(22.5..157.5).contains(&deg) {
                (1, 0)
            } else if deg < 67.5 {
                (1, 1)
            } else if deg < 112.5 {
                (0, 1)
            } else {
                (-1, 1)
            };
            let fwd = mag[(y as isize + dy) as usize * w + (x as isize + dx) as usize];
            let back = mag[(y as isize - dy) as usize * w + (x as isize - dx) as usize];
            if m > fwd && m >= back {
                thin[y * w + x] = m;
            }
        }
    }

    // Double threshold + hysteresis BFS from strong pixels (8-connectivity).
    let mut out = BinaryImage::empty(w, h)?;
    let mut queue = VecDeque::new();
    for y in 0..h {
        for x in 0..w {
            if thin[y * w + x] >= high {
                out.set(x, y, true);
                queue.push_back((x, y));
            }
        }
    }
    while let Some((x, y)) = queue.pop_front() {
        for dy in -1isize..=1 {
            for dx in -1isize..=1 {
                if dx == 0 && dy == 0 {
                    continue;
                }
                let (nx, ny) = (x as isize + dx, y as isize + dy);
                if nx < 0 || ny < 0 || nx >= w as isize || ny >= h as isize {
                    continue;
                }
                let (nx, ny) = (nx as usize, ny as usize);
                if !out.get(nx, ny) && thin[ny * w + nx] >= low {
                    out.set(nx, ny, true);
                    queue.push_back((nx, ny));
                }
            }
        }
    }
    Ok(out)
}
