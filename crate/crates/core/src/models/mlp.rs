//! Fully connected network with softmax output and cross-entropy loss,
//! trained by minibatch stochastic gradient descent.

use ndarray::{Array1, Array2};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::CoreError;
use crate::Result;

use super::tree::argmax;
use super::{Activation, MatrixData, MlpParams};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MlpFitted {
    pub params: MlpParams,
    pub class_count: usize,
    /// Per-layer weights, `out x in`.
    pub weights: Vec<MatrixData>,
    pub biases: Vec<Vec<f64>>,
}

fn activate(v: f64, a: Activation) -> f64 {
    match a {
        Activation::Identity => v,
        Activation::Relu => v.max(0.0),
    }
}

fn activate_grad(v: f64, a: Activation) -> f64 {
    match a {
        Activation::Identity => 1.0,
        Activation::Relu => {
            if v > 0.0 {
                1.0
            } else {
                0.0
            }
        }
    }
}

/// Network parameters as live arrays during training.
pub(crate) struct Net {
    pub weights: Vec<Array2<f64>>,
    pub biases: Vec<Array1<f64>>,
    pub activation: Activation,
}

impl Net {
    fn init(layers: &[usize], activation: Activation, rng: &mut ChaCha8Rng) -> Net {
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        for w in layers.windows(2) {
            let (fan_in, fan_out) = (w[0], w[1]);
            let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
            weights.push(Array2::from_shape_fn((fan_out, fan_in), |_| {
                rng.random_range(-limit..limit)
            }));
            biases.push(Array1::zeros(fan_out));
        }
        Net { weights, biases, activation }
    }

    /// Forward pass; returns pre-activations and activations per layer
    /// (activations[0] is the input).
    fn forward(&self, input: &Array1<f64>) -> (Vec<Array1<f64>>, Vec<Array1<f64>>) {
        let mut zs = Vec::with_capacity(self.weights.len());
        let mut activations = vec![input.clone()];
        for (l, (w, b)) in self.weights.iter().zip(&self.biases).enumerate() {
            let z = w.dot(activations.last().unwrap()) + b;
            let last = l == self.weights.len() - 1;
            let a = if last {
                z.clone() // linear output; softmax applied in the loss
            } else {
                z.mapv(|v| activate(v, self.activation))
            };
            zs.push(z);
            activations.push(a);
        }
        (zs, activations)
    }

    /// Mean cross-entropy over the batch.
    pub(crate) fn loss(&self, x: &Array2<f64>, y: &[usize]) -> f64 {
        let mut total = 0.0;
        for (i, row) in x.rows().into_iter().enumerate() {
            let (_, acts) = self.forward(&row.to_owned());
            let out = acts.last().unwrap();
            let p = softmax(out);
            total -= p[y[i]].max(1e-300).ln();
        }
        total / x.nrows() as f64
    }

    /// Mean gradients of the cross-entropy over the batch.
    pub(crate) fn gradients(
        &self,
        x: &Array2<f64>,
        y: &[usize],
    ) -> (Vec<Array2<f64>>, Vec<Array1<f64>>) {
        let mut gw: Vec<Array2<f64>> =
            self.weights.iter().map(|w| Array2::zeros(w.raw_dim())).collect();
        let mut gb: Vec<Array1<f64>> =
            self.biases.iter().map(|b| Array1::zeros(b.raw_dim())).collect();
        let n = x.nrows() as f64;
        for (i, row) in x.rows().into_iter().enumerate() {
            let input = row.to_owned();
            let (zs, acts) = self.forward(&input);
            let out = acts.last().unwrap();
            let mut delta = softmax(out);
            delta[y[i]] -= 1.0;
            // backward
            for l in (0..self.weights.len()).rev() {
                let a_prev = &acts[l];
                for r in 0..delta.len() {
                    gb[l][r] += delta[r] / n;
                    for c in 0..a_prev.len() {
                        gw[l][(r, c)] += delta[r] * a_prev[c] / n;
                    }
                }
                if l > 0 {
                    let mut next = Array1::zeros(self.weights[l].ncols());
                    for c in 0..next.len() {
                        let mut sum = 0.0;
                        for r in 0..delta.len() {
                            sum += self.weights[l][(r, c)] * delta[r];
                        }
                        next[c] = sum * activate_grad(zs[l - 1][c], self.activation);
                    }
                    delta = next;
                }
            }
        }
        (gw, gb)
    }
}

fn softmax(scores: &Array1<f64>) -> Array1<f64> {
    let max = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exp = scores.mapv(|v| (v - max).exp());
    let sum = exp.sum();
    exp / sum
}

pub fn fit(
    params: &MlpParams,
    x: &Array2<f64>,
    y: &[usize],
    class_count: usize,
    seed: u64,
) -> Result<MlpFitted> {
    if x.nrows() != y.len() {
        return Err(CoreError::Data("row/label mismatch".into()));
    }
    let mut layers = vec![x.ncols()];
    layers.extend_from_slice(&params.hidden);
    layers.push(class_count);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut net = Net::init(&layers, params.activation, &mut rng);

    let n = x.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    for _epoch in 0..params.epochs {
        order.shuffle(&mut rng);
        for chunk in order.chunks(params.batch_size) {
            let bx = x.select(ndarray::Axis(0), chunk);
            let by: Vec<usize> = chunk.iter().map(|&i| y[i]).collect();
            let (gw, gb) = net.gradients(&bx, &by);
            for l in 0..net.weights.len() {
                net.weights[l].scaled_add(-params.learning_rate, &gw[l]);
                net.biases[l].scaled_add(-params.learning_rate, &gb[l]);
            }
        }
    }

    Ok(MlpFitted {
        params: params.clone(),
        class_count,
        weights: net.weights.iter().map(MatrixData::from_array).collect(),
        biases: net.biases.iter().map(|b| b.to_vec()).collect(),
    })
}

fn to_net(fitted: &MlpFitted) -> Net {
    Net {
        weights: fitted.weights.iter().map(|m| m.to_array()).collect(),
        biases: fitted.biases.iter().map(|b| Array1::from_vec(b.clone())).collect(),
        activation: fitted.params.activation,
    }
}

pub fn predict(fitted: &MlpFitted, x: &Array2<f64>) -> Vec<usize> {
    let net = to_net(fitted);
    x.rows()
        .into_iter()
        .map(|row| {
            let (_, acts) = net.forward(&row.to_owned());
            let out = acts.last().unwrap();
            argmax(out.as_slice().unwrap())
        })
        .collect()
}

/// Compares analytic gradients with central finite differences on the given
/// batch; returns the largest relative error over all parameters.
pub fn gradient_check(
    params: &MlpParams,
    x: &Array2<f64>,
    y: &[usize],
    class_count: usize,
    seed: u64,
) -> f64 {
    let mut layers = vec![x.ncols()];
    layers.extend_from_slice(&params.hidden);
    layers.push(class_count);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut net = Net::init(&layers, params.activation, &mut rng);

    let (gw, gb) = net.gradients(x, y);
    let h = 1e-5;
    let mut max_rel = 0.0f64;
    for l in 0..net.weights.len() {
        let shape = net.weights[l].raw_dim();
        for r in 0..shape[0] {
            for c in 0..shape[1] {
                let orig = net.weights[l][(r, c)];
                net.weights[l][(r, c)] = orig + h;
                let up = net.loss(x, y);
                net.weights[l][(r, c)] = orig - h;
                let down = net.loss(x, y);
                net.weights[l][(r, c)] = orig;
                let fd = (up - down) / (2.0 * h);
                let an = gw[l][(r, c)];
                let rel = (fd - an).abs() / fd.abs().max(an.abs()).max(1e-8);
                max_rel = max_rel.max(rel);
            }
        }
        for r in 0..net.biases[l].len() {
            let orig = net.biases[l][r];
            net.biases[l][r] = orig + h;
            let up = net.loss(x, y);
            net.biases[l][r] = orig - h;
            let down = net.loss(x, y);
            net.biases[l][r] = orig;
            let fd = (up - down) / (2.0 * h);
            let an = gb[l][r];
            let rel = (fd - an).abs() / fd.abs().max(an.abs()).max(1e-8);
            max_rel = max_rel.max(rel);
        }
    }
    max_rel
}
