//! Masked color statistics over RGB, HSV and CIEL*a*b*.
//!
//! For every channel the masked mean and the sample standard deviation
//! (N-1 divisor) are reported, 18 values in the fixed channel order
//! R, G, B, H, S, V, L*, a*, b*. Hue is in degrees [0, 360); S and V in
//! [0, 1]; L* in [0, 100]; the Lab conversion uses the sRGB transfer
//! function and the D65 white point.

use crate::error::CoreError;
use crate::imaging::CellContour;
use crate::Result;

pub const COLOR_FEATURE_COUNT: usize = 18;

/// RGB (0-255) to HSV with H in degrees [0, 360), S and V in [0, 1].
pub fn rgb_to_hsv(rgb: [u8; 3]) -> [f64; 3] {
    let r = rgb[0] as f64 / 255.0;
    let g = rgb[1] as f64 / 255.0;
    let b = rgb[2] as f64 / 255.0;
    let max = r.max(g).max(b);
    let min = r.min(g).min(b);
    let delta = max - min;
    let h = if delta == 0.0 {
        0.0
    } else if max == r {
        60.0 * (((g - b) / delta).rem_euclid(6.0))
    } else if max == g {
        60.0 * ((b - r) / delta + 2.0)
    } else {
        60.0 * ((r - g) / delta + 4.0)
    };
    let s = if max == 0.0 { 0.0 } else { delta / max };
    [h, s, max]
}

/// sRGB (0-255) to CIEL*a*b* under D65.
pub fn rgb_to_lab(rgb: [u8; 3]) -> [f64; 3] {
    fn srgb_to_linear(c: u8) -> f64 {
        let c = c as f64 / 255.0;
        if c <= 0.04045 {
            c / 12.92
        } else {
            ((c + 0.055) / 1.055).powf(2.4)
        }
    }
    let r = srgb_to_linear(rgb[0]);
    let g = srgb_to_linear(rgb[1]);
    let b = srgb_to_linear(rgb[2]);
    // sRGB -> XYZ (D65)
    let x = 0.4124564 * r + 0.3575761 * g + 0.1804375 * b;
    let y = 0.2126729 * r + 0.7151522 * g + 0.0721750 * b;
    let z = 0.0193339 * r + 0.1191920 * g + 0.9503041 * b;
    // D65 white point
    let (xn, yn, zn) = (0.95047, 1.0, 1.08883);
    fn f(t: f64) -> f64 {
        const DELTA: f64 = 6.0 / 29.0;
        if t > DELTA * DELTA * DELTA {
            t.cbrt()
        } else {
            t / (3.0 * DELTA * DELTA) + 4.0 / 29.0
        }
    }
    let (fx, fy, fz) = (f(x / xn), f(y / yn), f(z / zn));
    [116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)]
}

/// Computes the 18 color values of a cell: masked mean and sample standard
/// deviation per channel. A single-pixel region has all standard deviations
/// defined as 0.
pub fn color_features(cell: &CellContour) -> Result<[f64; COLOR_FEATURE_COUNT]> {
    let mask = &cell.mask;
    let roi = &cell.roi;
    if roi.width() != mask.width() || roi.height() != mask.height() {
        return Err(CoreError::Image(format!(
            "ROI {}x{} does not match mask {}x{}",
            roi.width(),
            roi.height(),
            mask.width(),
            mask.height()
        )));
    }
    let mut channels: [Vec<f64>; 9] = Default::default();
    for y in 0..mask.height() {
        for x in 0..mask.width() {
            if !mask.get(x, y) {
                continue;
            }
            let rgb = roi.get(x, y);
            let hsv = rgb_to_hsv(rgb);
            let lab = rgb_to_lab(rgb);
            channels[0].push(rgb[0] as f64);
            channels[1].push(rgb[1] as f64);
            channels[2].push(rgb[2] as f64);
            channels[3].push(hsv[0]);
            channels[4].push(hsv[1]);
            channels[5].push(hsv[2]);
            channels[6].push(lab[0]);
            channels[7].push(lab[1]);
            channels[8].push(lab[2]);
        }
    }
    let n = channels[0].len();
    if n == 0 {
        return Err(CoreError::Image("empty region under mask".into()));
    }
    let mut out = [0.0f64; COLOR_FEATURE_COUNT];
    for (c, values) in channels.iter().enumerate() {
        let mean = values.iter().sum::<f64>() / n as f64;
        let std = if n >= 2 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0)).sqrt()
        } else {
            0.0
        };
        out[2 * c] = mean;
        out[2 * c + 1] = std;
    }
    Ok(out)
}
