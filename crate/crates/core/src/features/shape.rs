//! Geometric descriptors of a segmented cell.
//!
//! Definitions that the surrounding literature leaves underspecified are
//! fixed here and documented inline; `R factor`, `Shape` and `Ellipse
//! variance` in particular follow the conventions below rather than any
//! single canonical source.

use crate::error::CoreError;
use crate::imaging::geometry::{
    convex_hull, crofton_perimeter, feret_diameters, polygon_area,
};
use crate::imaging::CellContour;
use crate::Result;

pub const SHAPE_FEATURE_COUNT: usize = 41;

/// Canonical shape feature names, in vector order.
///
/// - `Area`: foreground pixel count of the mask.
/// - `Perimeter`: 4-direction Crofton boundary length estimate.
/// - `Circularity`: `4*pi*Area / Perimeter^2` (1 for an ideal disc).
/// - `Eccentricity`: short-axis/long-axis ratio of the moment ellipse,
///   in (0, 1], 1 for a disc.
/// - `Aspect ratio`: long-axis/short-axis ratio (>= 1).
/// - `Elongation`: `1 - Eccentricity`.
/// - `Roundness`: `4*Area / (pi * MajorAxis^2)`.
/// - `Compactness`: `AreaEquivalentDiameter / MajorAxis`.
/// - `Solidity`: `Area / ConvexArea`, clamped to at most 1.
/// - `Convex area`: convex hull area (at least `Area`).
/// - `Extent`: `Area / (bbox width * bbox height)`.
/// - `Area equivalent diameter`: `2*sqrt(Area/pi)`.
/// - `Perimeter equivalent diameter`: `Perimeter / pi`.
/// - `Major axis` / `Minor axis`: full axis lengths of the ellipse with the
///   region's second central moments (with the 1/12 per-pixel correction).
/// - `Min feret` / `Max feret`: extremes of tangent-line distances, measured
///   on pixel corners.
/// - `Feret ratio`: `Min feret / Max feret`.
/// - `R factor`: `Perimeter / (2*pi*MeanR)`; 1 for a disc, larger for
///   irregular boundaries.
/// - `Max R` / `Min R` / `Mean R`: extremes and mean of the
///   boundary-to-centroid radii.
/// - `Shape`: contour index `Perimeter / (2*sqrt(pi*Area))`.
/// - `Ellipse variance`: coefficient of variation of the boundary's
///   normalized radii with respect to the moment ellipse; 0 for an exact
///   ellipse.
/// - `HU1`..`HU7`: Hu moment invariants of the binary mask.
/// - `FD1`..`FD10`: Fourier descriptors of the centroid-distance signature,
///   magnitudes of harmonics 1..10 normalized by the DC term.
pub const SHAPE_FEATURE_NAMES: [&str; SHAPE_FEATURE_COUNT] = [
    "Area",
    "Perimeter",
    "Circularity",
    "Eccentricity",
    "Aspect ratio",
    "Elongation",
    "Roundness",
    "Compactness",
    "Solidity",
    "Convex area",
    "Extent",
    "Area equivalent diameter",
    "Perimeter equivalent diameter",
    "Major axis",
    "Minor axis",
    "Min feret",
    "Max feret",
    "Feret ratio",
    "R factor",
    "Max R",
    "Min R",
    "Mean R",
    "Shape",
    "Ellipse variance",
    "HU1",
    "HU2",
    "HU3",
    "HU4",
    "HU5",
    "HU6",
    "HU7",
    "FD1",
    "FD2",
    "FD3",
    "FD4",
    "FD5",
    "FD6",
    "FD7",
    "FD8",
    "FD9",
    "FD10",
];

/// Number of resampled boundary points for the Fourier descriptors.
const FD_SAMPLES: usize = 128;

/// Computes the 41 shape values of [`SHAPE_FEATURE_NAMES`].
pub fn shape_features(cell: &CellContour) -> Result<[f64; SHAPE_FEATURE_COUNT]> {
    let area = cell.area() as f64;
    if area <= 0.0 {
        return Err(CoreError::DegenerateGeometry("contour with zero area".into()));
    }
    if cell.points.len() < 8 {
        return Err(CoreError::DegenerateGeometry(format!(
            "boundary has {} points, need at least 8",
            cell.points.len()
        )));
    }
    let mask = &cell.mask;
    // Work in mask-local coordinates; every feature below is
    // translation-invariant by construction.
    let local: Vec<[f64; 2]> = cell
        .points
        .iter()
        .map(|p| [p[0] - cell.bbox.x as f64, p[1] - cell.bbox.y as f64])
        .collect();

    let perimeter = crofton_perimeter(mask);
    let circularity = 4.0 * std::f64::consts::PI * area / (perimeter * perimeter);

    // Raw and central mask moments.
    let (mut sx, mut sy) = (0.0f64, 0.0f64);
    for y in 0..mask.height() {
        for x in 0..mask.width() {
            if mask.get(x, y) {
                sx += x as f64;
                sy += y as f64;
            }
        }
    }
    let (cx, cy) = (sx / area, sy / area);
    let mut mu = CentralMoments::default();
    for y in 0..mask.height() {
        for x in 0..mask.width() {
            if mask.get(x, y) {
                mu.accumulate(x as f64 - cx, y as f64 - cy);
            }
        }
    }

    // Moment ellipse with the 1/12 per-pixel variance correction, so a
    // one-pixel-thin region still has nonzero minor axis and an axis-aligned
    // w x h rectangle reports an aspect ratio of exactly w/h.
    let vxx = mu.mu20 / area + 1.0 / 12.0;
    let vyy = mu.mu02 / area + 1.0 / 12.0;
    let vxy = mu.mu11 / area;
    let common = ((vxx - vyy).powi(2) + 4.0 * vxy * vxy).sqrt();
    let l1 = (vxx + vyy + common) / 2.0;
    let l2 = ((vxx + vyy - common) / 2.0).max(0.0);
    let major = 4.0 * l1.sqrt();
    let minor = 4.0 * l2.sqrt();
    let eccentricity = if major > 0.0 { (minor / major).clamp(0.0, 1.0) } else { 1.0 };
    let aspect_ratio = if minor > 0.0 { major / minor } else { f64::MAX.sqrt() };
    let theta = 0.5 * (2.0 * vxy).atan2(vxx - vyy);

    let hull = convex_hull(&local);
    let convex_area = polygon_area(&hull).max(area);
    let solidity = area / convex_area;
    let extent = area / (cell.bbox.w as f64 * cell.bbox.h as f64);
    let aed = 2.0 * (area / std::f64::consts::PI).sqrt();
    let ped = perimeter / std::f64::consts::PI;
    let (min_feret, max_feret) = feret_diameters(&local);

    // Boundary-to-centroid radii.
    let radii: Vec<f64> = local.iter().map(|p| (p[0] - cx).hypot(p[1] - cy)).collect();
    let max_r = radii.iter().copied().fold(0.0f64, f64::max);
    let min_r = radii.iter().copied().fold(f64::INFINITY, f64::min);
    let mean_r = radii.iter().sum::<f64>() / radii.len() as f64;
    let r_factor = if mean_r > 0.0 {
        perimeter / (2.0 * std::f64::consts::PI * mean_r)
    } else {
        1.0
    };
    let shape_index = perimeter / (2.0 * (std::f64::consts::PI * area).sqrt());

    // Normalized boundary radii against the moment ellipse.
    let (a_half, b_half) = ((major / 2.0).max(1e-9), (minor / 2.0).max(1e-9));
    let (ct, st) = (theta.cos(), theta.sin());
    let q: Vec<f64> = local
        .iter()
        .map(|p| {
            let (dx, dy) = (p[0] - cx, p[1] - cy);
            let u = dx * ct + dy * st;
            let v = -dx * st + dy * ct;
            ((u / a_half).powi(2) + (v / b_half).powi(2)).sqrt()
        })
        .collect();
    let q_mean = q.iter().sum::<f64>() / q.len() as f64;
    let q_var = q.iter().map(|v| (v - q_mean).powi(2)).sum::<f64>() / q.len() as f64;
    let ellipse_variance = if q_mean > 0.0 { q_var.sqrt() / q_mean } else { 0.0 };

    let hu = hu_moments(&mu, area);
    let fd = fourier_descriptors(&local, cx, cy);

    let mut out = [0.0f64; SHAPE_FEATURE_COUNT];
    let values = [
        area,
        perimeter,
        circularity,
        eccentricity,
        aspect_ratio,
        1.0 - eccentricity,
        4.0 * area / (std::f64::consts::PI * major * major),
        aed / major,
        solidity,
        convex_area,
        extent,
        aed,
        ped,
        major,
        minor,
        min_feret,
        max_feret,
        min_feret / max_feret,
        r_factor,
        max_r,
        min_r,
        mean_r,
        shape_index,
        ellipse_variance,
        hu[0],
        hu[1],
        hu[2],
        hu[3],
        hu[4],
        hu[5],
        hu[6],
        fd[0],
        fd[1],
        fd[2],
        fd[3],
        fd[4],
        fd[5],
        fd[6],
        fd[7],
        fd[8],
        fd[9],
    ];
    out.copy_from_slice(&values);
    if let Some(v) = out.iter().find(|v| !v.is_finite()) {
        return Err(CoreError::DegenerateGeometry(format!("non-finite shape value {v}")));
    }
    Ok(out)
}

#[derive(Default)]
struct CentralMoments {
    mu20: f64,
    mu02: f64,
    mu11: f64,
    mu30: f64,
    mu03: f64,
    mu21: f64,
    mu12: f64,
}

impl CentralMoments {
    fn accumulate(&mut self, dx: f64, dy: f64) {
        self.mu20 += dx * dx;
        self.mu02 += dy * dy;
        self.mu11 += dx * dy;
        self.mu30 += dx * dx * dx;
        self.mu03 += dy * dy * dy;
        self.mu21 += dx * dx * dy;
        self.mu12 += dx * dy * dy;
    }
}

/// The seven Hu invariants from normalized central moments.
fn hu_moments(mu: &CentralMoments, m00: f64) -> [f64; 7] {
    let norm = |v: f64, order: f64| v / m00.powf(1.0 + order / 2.0);
    let n20 = norm(mu.mu20, 2.0);
    let n02 = norm(mu.mu02, 2.0);
    let n11 = norm(mu.mu11, 2.0);
    let n30 = norm(mu.mu30, 3.0);
    let n03 = norm(mu.mu03, 3.0);
    let n21 = norm(mu.mu21, 3.0);
    let n12 = norm(mu.mu12, 3.0);

    let h1 = n20 + n02;
    let h2 = (n20 - n02).powi(2) + 4.0 * n11 * n11;
    let h3 = (n30 - 3.0 * n12).powi(2) + (3.0 * n21 - n03).powi(2);
    let h4 = (n30 + n12).powi(2) + (n21 + n03).powi(2);
    let h5 = (n30 - 3.0 * n12)
        * (n30 + n12)
        * ((n30 + n12).powi(2) - 3.0 * (n21 + n03).powi(2))
        + (3.0 * n21 - n03) * (n21 + n03) * (3.0 * (n30 + n12).powi(2) - (n21 + n03).powi(2));
    let h6 = (n20 - n02) * ((n30 + n12).powi(2) - (n21 + n03).powi(2))
        + 4.0 * n11 * (n30 + n12) * (n21 + n03);
    let h7 = (3.0 * n21 - n03)
        * (n30 + n12)
        * ((n30 + n12).powi(2) - 3.0 * (n21 + n03).powi(2))
        - (n30 - 3.0 * n12) * (n21 + n03) * (3.0 * (n30 + n12).powi(2) - (n21 + n03).powi(2));
    [h1, h2, h3, h4, h5, h6, h7]
}

/// Magnitudes of harmonics 1..10 of the arc-length-resampled
/// centroid-distance signature, normalized by the DC term. Invariant to
/// translation, rotation and scale of the boundary.
fn fourier_descriptors(points: &[[f64; 2]], cx: f64, cy: f64) -> [f64; 10] {
    // resample the closed polygon at equal arc-length steps
    let n = points.len();
    let mut cum = Vec::with_capacity(n + 1);
    cum.push(0.0);
    for i in 0..n {
        let a = points[i];
        let b = points[(i + 1) % n];
        cum.push(cum[i] + (a[0] - b[0]).hypot(a[1] - b[1]));
    }
    let total = *cum.last().unwrap();
    let mut signature = [0.0f64; FD_SAMPLES];
    if total <= 0.0 {
        return [0.0; 10];
    }
    let mut seg = 0usize;
    for (k, r) in signature.iter_mut().enumerate() {
        let target = total * k as f64 / FD_SAMPLES as f64;
        while seg + 1 < cum.len() - 1 && cum[seg + 1] < target {
            seg += 1;
        }
        let a = points[seg];
        let b = points[(seg + 1) % n];
        let span = cum[seg + 1] - cum[seg];
        let t = if span > 0.0 { (target - cum[seg]) / span } else { 0.0 };
        let x = a[0] + t * (b[0] - a[0]);
        let y = a[1] + t * (b[1] - a[1]);
        *r = (x - cx).hypot(y - cy);
    }
    let dc: f64 = signature.iter().sum();
    let mut out = [0.0f64; 10];
    if dc <= 0.0 {
        return out;
    }
    for (h, o) in out.iter_mut().enumerate() {
        let freq = (h + 1) as f64;
        let mut re = 0.0;
        let mut im = 0.0;
        for (k, &r) in signature.iter().enumerate() {
            let phase = -2.0 * std::f64::consts::PI * freq * k as f64 / FD_SAMPLES as f64;
            re += r * phase.cos();
            im += r * phase.sin();
        }
        *o = re.hypot(im) / dc;
    }
    out
}
