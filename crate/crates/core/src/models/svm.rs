//! Soft-margin SVM with an RBF kernel, trained by sequential minimal
//! optimization; multiclass via one-vs-one voting with margin tie-breaks.

use ndarray::{Array2, ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::CoreError;
use crate::Result;

use super::{MatrixData, SvmParams};

/// One fitted binary subproblem (`class_a` maps to +1, `class_b` to -1).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SvmPairFitted {
    pub class_a: usize,
    pub class_b: usize,
    pub support_x: MatrixData,
    /// `alpha_i * y_i` per support vector.
    pub coef: Vec<f64>,
    pub bias: f64,
    pub gamma: f64,
    /// Largest KKT violation at convergence, for diagnostics.
    pub kkt_residual: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SvmFitted {
    pub pairs: Vec<SvmPairFitted>,
    pub class_count: usize,
}

fn rbf(a: ArrayView1<f64>, b: ArrayView1<f64>, gamma: f64) -> f64 {
    let mut d2 = 0.0;
    for (x, y) in a.iter().zip(b.iter()) {
        let d = x - y;
        d2 += d * d;
    }
    (-gamma * d2).exp()
}

pub fn fit(
    params: &SvmParams,
    x: &Array2<f64>,
    y: &[usize],
    class_count: usize,
) -> Result<SvmFitted> {
    let gamma = params.gamma.resolve(x.ncols());
    let mut pairs = Vec::new();
    for a in 0..class_count {
        for b in a + 1..class_count {
            let rows: Vec<usize> =
                (0..x.nrows()).filter(|&i| y[i] == a || y[i] == b).collect();
            if rows.is_empty() {
                continue;
            }
            let sub_x = x.select(ndarray::Axis(0), &rows);
            let sub_y: Vec<f64> =
                rows.iter().map(|&i| if y[i] == a { 1.0 } else { -1.0 }).collect();
            let solution = smo(&sub_x.view(), &sub_y, params.c, gamma, params.tol, params.max_passes)?;

            // keep support vectors only
            let sv_idx: Vec<usize> =
                (0..rows.len()).filter(|&i| solution.alpha[i] > 1e-12).collect();
            let support_x = sub_x.select(ndarray::Axis(0), &sv_idx);
            let coef: Vec<f64> =
                sv_idx.iter().map(|&i| solution.alpha[i] * sub_y[i]).collect();
            pairs.push(SvmPairFitted {
                class_a: a,
                class_b: b,
                support_x: MatrixData::from_array(&support_x),
                coef,
                bias: solution.bias,
                gamma,
                kkt_residual: solution.kkt_residual,
            });
        }
    }
    Ok(SvmFitted { pairs, class_count })
}

struct SmoSolution {
    alpha: Vec<f64>,
    bias: f64,
    kkt_residual: f64,
}

/// Platt-style SMO on a precomputed Gram matrix. The second-choice heuristic
/// is the standard max |E1 - E2| rule with deterministic fallback sweeps, so
/// training is reproducible.
fn smo(
    x: &ArrayView2<f64>,
    y: &[f64],
    c: f64,
    gamma: f64,
    tol: f64,
    max_passes: usize,
) -> Result<SmoSolution> {
    let n = x.nrows();
    if n == 0 {
        return Err(CoreError::Data("empty binary subproblem".into()));
    }
    // Gram cache
    let mut k = vec![0.0f64; n * n];
    for i in 0..n {
        for j in i..n {
            let v = rbf(x.row(i), x.row(j), gamma);
            k[i * n + j] = v;
            k[j * n + i] = v;
        }
    }
    let kernel = |i: usize, j: usize| k[i * n + j];

    let mut alpha = vec![0.0f64; n];
    let mut bias = 0.0f64;
    // E_i = f(x_i) - y_i; with alpha = 0 and b = 0, f = 0
    let mut err: Vec<f64> = y.iter().map(|&v| -v).collect();
    const EPS: f64 = 1e-12;

    let take_step = |i1: usize,
                         i2: usize,
                         alpha: &mut Vec<f64>,
                         bias: &mut f64,
                         err: &mut Vec<f64>|
     -> bool {
        if i1 == i2 {
            return false;
        }
        let (a1_old, a2_old) = (alpha[i1], alpha[i2]);
        let (y1, y2) = (y[i1], y[i2]);
        let (e1, e2) = (err[i1], err[i2]);
        let s = y1 * y2;
        let (low, high) = if (y1 - y2).abs() > 0.5 {
            ((a2_old - a1_old).max(0.0), (c + a2_old - a1_old).min(c))
        } else {
            ((a2_old + a1_old - c).max(0.0), (a2_old + a1_old).min(c))
        };
        if low >= high {
            return false;
        }
        let (k11, k12, k22) = (kernel(i1, i1), kernel(i1, i2), kernel(i2, i2));
        let eta = k11 + k22 - 2.0 * k12;
        if eta <= 0.0 {
            // duplicate or degenerate pair; progress impossible along it
            return false;
        }
        let mut a2 = a2_old + y2 * (e1 - e2) / eta;
        a2 = a2.clamp(low, high);
        if (a2 - a2_old).abs() < EPS * (a2 + a2_old + EPS) {
            return false;
        }
        let a1 = a1_old + s * (a2_old - a2);

        let b_old = *bias;
        let b1 = b_old - e1 - y1 * (a1 - a1_old) * k11 - y2 * (a2 - a2_old) * k12;
        let b2 = b_old - e2 - y1 * (a1 - a1_old) * k12 - y2 * (a2 - a2_old) * k22;
        let b_new = if a1 > 0.0 && a1 < c {
            b1
        } else if a2 > 0.0 && a2 < c {
            b2
        } else {
            (b1 + b2) / 2.0
        };

        let (d1, d2) = (y1 * (a1 - a1_old), y2 * (a2 - a2_old));
        for i in 0..n {
            err[i] += d1 * kernel(i1, i) + d2 * kernel(i2, i) + (b_new - b_old);
        }
        alpha[i1] = a1;
        alpha[i2] = a2;
        *bias = b_new;
        true
    };

    let examine = |i2: usize,
                       alpha: &mut Vec<f64>,
                       bias: &mut f64,
                       err: &mut Vec<f64>|
     -> bool {
        let (y2, a2, e2) = (y[i2], alpha[i2], err[i2]);
        let r2 = e2 * y2;
        if !((r2 < -tol && a2 < c) || (r2 > tol && a2 > 0.0)) {
            return false;
        }
        // heuristic 1: maximize |E1 - E2| over non-bound multipliers
        let mut best: Option<(f64, usize)> = None;
        for i in 0..n {
            if alpha[i] > 0.0 && alpha[i] < c {
                let gap = (err[i] - e2).abs();
                if best.map_or(true, |(g, _)| gap > g) {
                    best = Some((gap, i));
                }
            }
        }
        if let Some((_, i1)) = best {
            if take_step(i1, i2, alpha, bias, err) {
                return true;
            }
        }
        // deterministic fallback sweeps: non-bound first, then all
        for off in 0..n {
            let i1 = (i2 + 1 + off) % n;
            if alpha[i1] > 0.0 && alpha[i1] < c && take_step(i1, i2, alpha, bias, err) {
                return true;
            }
        }
        for off in 0..n {
            let i1 = (i2 + 1 + off) % n;
            if take_step(i1, i2, alpha, bias, err) {
                return true;
            }
        }
        false
    };

    let mut examine_all = true;
    let mut passes = 0usize;
    loop {
        let mut num_changed = 0usize;
        if examine_all {
            for i in 0..n {
                if examine(i, &mut alpha, &mut bias, &mut err) {
                    num_changed += 1;
                }
            }
        } else {
            for i in 0..n {
                if alpha[i] > 0.0
                    && alpha[i] < c
                    && examine(i, &mut alpha, &mut bias, &mut err)
                {
                    num_changed += 1;
                }
            }
        }
        passes += 1;
        if examine_all {
            if num_changed == 0 {
                break;
            }
            examine_all = false;
        } else if num_changed == 0 {
            examine_all = true;
        }
        if passes >= max_passes {
            log::warn!("SMO hit the {max_passes}-pass cap before full convergence");
            break;
        }
    }

    let kkt_residual = kkt_residual(&alpha, y, &err, c);
    Ok(SmoSolution { alpha, bias, kkt_residual })
}

/// Largest KKT violation: for alpha = 0 the functional margin must be >= 1,
/// for alpha = C it must be <= 1, and in between it must equal 1.
fn kkt_residual(alpha: &[f64], y: &[f64], err: &[f64], c: f64) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..alpha.len() {
        // y_i * f(x_i) = y_i * E_i + 1
        let yf = y[i] * err[i] + 1.0;
        let v = if alpha[i] <= 1e-12 {
            (1.0 - yf).max(0.0)
        } else if alpha[i] >= c - 1e-12 {
            (yf - 1.0).max(0.0)
        } else {
            (yf - 1.0).abs()
        };
        worst = worst.max(v);
    }
    worst
}

impl SvmPairFitted {
    pub fn decision(&self, row: ArrayView1<f64>) -> f64 {
        let d = self.support_x.cols;
        let mut sum = self.bias;
        for (i, coef) in self.coef.iter().enumerate() {
            let sv = &self.support_x.data[i * d..(i + 1) * d];
            let mut dist2 = 0.0;
            for (a, b) in sv.iter().zip(row.iter()) {
                let diff = a - b;
                dist2 += diff * diff;
            }
            sum += coef * (-self.gamma * dist2).exp();
        }
        sum
    }
}

/// One-vs-one voting; vote ties break by aggregate decision margin, then by
/// the lowest class index.
pub fn predict(fitted: &SvmFitted, x: &Array2<f64>) -> Vec<usize> {
    x.rows()
        .into_iter()
        .map(|row| {
            let mut votes = vec![0u32; fitted.class_count];
            let mut margin = vec![0.0f64; fitted.class_count];
            for pair in &fitted.pairs {
                let d = pair.decision(row);
                if d > 0.0 {
                    votes[pair.class_a] += 1;
                } else {
                    votes[pair.class_b] += 1;
                }
                margin[pair.class_a] += d;
                margin[pair.class_b] -= d;
            }
            let mut best = 0usize;
            for cidx in 1..fitted.class_count {
                let better = votes[cidx] > votes[best]
                    || (votes[cidx] == votes[best] && margin[cidx] > margin[best]);
                if better {
                    best = cidx;
                }
            }
            best
        })
        .collect()
}

/// Largest KKT residual across the one-vs-one subproblems.
pub fn max_kkt_residual(fitted: &SvmFitted) -> f64 {
    fitted.pairs.iter().map(|p| p.kkt_residual).fold(0.0, f64::max)
}

/// True when every stored dual coefficient satisfies `|coef| <= C`.
pub fn alphas_within_box(fitted: &SvmFitted, c: f64) -> bool {
    fitted
        .pairs
        .iter()
        .all(|p| p.coef.iter().all(|&v| v.abs() <= c + 1e-9))
}
