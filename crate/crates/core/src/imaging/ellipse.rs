//! Direct least-squares ellipse fitting (constrained conic fit) and
//! geometric ellipse parameters.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::CoreError;
use crate::Result;

/// Geometric ellipse: center, semi-axes (`a >= b`) and rotation of the major
/// axis in radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ellipse {
    pub cx: f64,
    pub cy: f64,
    pub a: f64,
    pub b: f64,
    pub theta: f64,
}

impl Ellipse {
    pub fn area(&self) -> f64 {
        std::f64::consts::PI * self.a * self.b
    }

    /// Squared normalized radius: <= 1 inside, 1 on the boundary.
    pub fn normalized_distance(&self, x: f64, y: f64) -> f64 {
        let (dx, dy) = (x - self.cx, y - self.cy);
        let (c, s) = (self.theta.cos(), self.theta.sin());
        let u = dx * c + dy * s;
        let v = -dx * s + dy * c;
        (u / self.a).powi(2) + (v / self.b).powi(2)
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        self.normalized_distance(x, y) <= 1.0
    }

    /// Closed boundary polygon with `n` parametric samples.
    pub fn polygon(&self, n: usize) -> Vec<[f64; 2]> {
        let (c, s) = (self.theta.cos(), self.theta.sin());
        (0..n)
            .map(|i| {
                let t = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
                let (u, v) = (self.a * t.cos(), self.b * t.sin());
                [self.cx + u * c - v * s, self.cy + u * s + v * c]
            })
            .collect()
    }
}

/// Fits an ellipse to scattered points by the direct least-squares conic fit
/// constrained to ellipses. Needs at least 6 points; collinear or otherwise
/// degenerate configurations produce an error.
pub fn fit_ellipse(points: &[[f64; 2]]) -> Result<Ellipse> {
    if points.len() < 6 {
        return Err(CoreError::DegenerateGeometry(format!(
            "ellipse fit needs >= 6 points, got {}",
            points.len()
        )));
    }
    // Center for conditioning.
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p[0]).sum::<f64>() / n;
    let my = points.iter().map(|p| p[1]).sum::<f64>() / n;

    // Scatter blocks: D1 = [x^2, xy, y^2], D2 = [x, y, 1].
    let mut s1 = Matrix3::<f64>::zeros();
    let mut s2 = Matrix3::<f64>::zeros();
    let mut s3 = Matrix3::<f64>::zeros();
    for p in points {
        let (x, y) = (p[0] - mx, p[1] - my);
        let d1 = Vector3::new(x * x, x * y, y * y);
        let d2 = Vector3::new(x, y, 1.0);
        s1 += d1 * d1.transpose();
        s2 += d1 * d2.transpose();
        s3 += d2 * d2.transpose();
    }
    let s3_inv = s3
        .try_inverse()
        .ok_or_else(|| CoreError::DegenerateGeometry("singular scatter matrix".into()))?;
    let t = -s3_inv * s2.transpose();
    let m = s1 + s2 * t;
    // Apply the inverse ellipse-constraint matrix C1^-1.
    let reduced = Matrix3::new(
        m[(2, 0)] / 2.0,
        m[(2, 1)] / 2.0,
        m[(2, 2)] / 2.0,
        -m[(1, 0)],
        -m[(1, 1)],
        -m[(1, 2)],
        m[(0, 0)] / 2.0,
        m[(0, 1)] / 2.0,
        m[(0, 2)] / 2.0,
    );

    // The ellipse solution is the eigenvector with a^T C a > 0, i.e.
    // 4ac - b^2 > 0. Enumerate the real eigenvalues of the (non-symmetric)
    // reduced matrix via its characteristic cubic.
    let mut best: Option<Vector3<f64>> = None;
    for lambda in real_eigenvalues(&reduced) {
        let v = eigenvector_for(&reduced, lambda);
        let (a, b, c) = (v[0], v[1], v[2]);
        if 4.0 * a * c - b * b > 0.0 && v.iter().all(|x| x.is_finite()) {
            best = Some(v);
            break;
        }
    }
    let a1 = best.ok_or_else(|| {
        CoreError::DegenerateGeometry("no ellipse solution (collinear or degenerate arc)".into())
    })?;
    let a2 = t * a1;
    // Conic coefficients in the centered frame.
    let (ca, cb, cc, cd, ce, cf) = (a1[0], a1[1], a1[2], a2[0], a2[1], a2[2]);
    conic_to_ellipse(ca, cb, cc, cd, ce, cf, mx, my)
}

/// Real roots of the characteristic polynomial of a 3x3 matrix
/// (trigonometric solution of the cubic), largest first.
fn real_eigenvalues(m: &Matrix3<f64>) -> Vec<f64> {
    // det(M - x I) = -x^3 + tr x^2 - q x + det
    let tr = m[(0, 0)] + m[(1, 1)] + m[(2, 2)];
    let q = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]
        + m[(0, 0)] * m[(2, 2)] - m[(0, 2)] * m[(2, 0)]
        + m[(1, 1)] * m[(2, 2)] - m[(1, 2)] * m[(2, 1)];
    let det = m.determinant();
    // x^3 - tr x^2 + q x - det = 0; depressed: y^3 + py + r with x = y + tr/3
    let p = q - tr * tr / 3.0;
    let r = -2.0 * tr * tr * tr / 27.0 + tr * q / 3.0 - det;
    let shift = tr / 3.0;
    let mut roots = Vec::new();
    if p.abs() < 1e-30 {
        roots.push((-r).cbrt() + shift);
    } else {
        let disc = -4.0 * p * p * p - 27.0 * r * r;
        if disc >= 0.0 {
            // three real roots
            let m2 = 2.0 * (-p / 3.0).sqrt();
            let arg = (3.0 * r / (p * m2)).clamp(-1.0, 1.0);
            let phi = arg.acos() / 3.0;
            for k in 0..3 {
                roots
                    .push(m2 * (phi - 2.0 * std::f64::consts::PI * k as f64 / 3.0).cos() + shift);
            }
        } else {
            // one real root (Cardano)
            let s = (r * r / 4.0 + p * p * p / 27.0).sqrt();
            let u = (-r / 2.0 + s).cbrt();
            let v = (-r / 2.0 - s).cbrt();
            roots.push(u + v + shift);
        }
    }
    roots.sort_by(|a, b| b.partial_cmp(a).unwrap());
    roots
}

/// Null-space direction of `M - lambda I` via the largest cross product of
/// row pairs.
fn eigenvector_for(m: &Matrix3<f64>, lambda: f64) -> Vector3<f64> {
    let a = m - Matrix3::identity() * lambda;
    let r0 = Vector3::new(a[(0, 0)], a[(0, 1)], a[(0, 2)]);
    let r1 = Vector3::new(a[(1, 0)], a[(1, 1)], a[(1, 2)]);
    let r2 = Vector3::new(a[(2, 0)], a[(2, 1)], a[(2, 2)]);
    let candidates = [r0.cross(&r1), r0.cross(&r2), r1.cross(&r2)];
    let best = candidates
        .iter()
        .max_by(|x, y| x.norm().partial_cmp(&y.norm()).unwrap())
        .copied()
        .unwrap_or_else(Vector3::zeros);
    if best.norm() > 0.0 {
        best / best.norm()
    } else {
        best
    }
}

#[allow(clippy::too_many_arguments)]
fn conic_to_ellipse(
    a: f64,
    b: f64,
    c: f64,
    d: f64,
    e: f64,
    f: f64,
    mx: f64,
    my: f64,
) -> Result<Ellipse> {
    let k = b * b - 4.0 * a * c;
    if k >= 0.0 {
        return Err(CoreError::DegenerateGeometry("conic is not an ellipse".into()));
    }
    let cx = (2.0 * c * d - b * e) / k;
    let cy = (2.0 * a * e - b * d) / k;
    let num = 2.0 * (a * e * e + c * d * d + f * b * b - b * d * e - 4.0 * a * c * f);
    let root = ((a - c) * (a - c) + b * b).sqrt();
    let den1 = k * (root - (a + c));
    let den2 = k * (-root - (a + c));
    if den1 == 0.0 || den2 == 0.0 {
        return Err(CoreError::DegenerateGeometry("degenerate ellipse axes".into()));
    }
    let (r1, r2) = ((num / den1).sqrt(), (num / den2).sqrt());
    if !(r1.is_finite() && r2.is_finite() && r1 > 0.0 && r2 > 0.0) {
        return Err(CoreError::DegenerateGeometry("non-finite ellipse axes".into()));
    }
    // Major-axis angle.
    let theta = if b.abs() < 1e-12 && a <= c {
        0.0
    } else if b.abs() < 1e-12 {
        std::f64::consts::FRAC_PI_2
    } else {
        0.5 * (b / (a - c)).atan()
            + if a > c { std::f64::consts::FRAC_PI_2 } else { 0.0 }
    };
    let (major, minor, theta) = if r1 >= r2 {
        (r1, r2, theta)
    } else {
        (r2, r1, theta + std::f64::consts::FRAC_PI_2)
    };
    Ok(Ellipse { cx: cx + mx, cy: cy + my, a: major, b: minor, theta })
}
