//! Brute-force k-nearest-neighbors with Minkowski distances.

use ndarray::{Array2, ArrayView1};
use serde::{Deserialize, Serialize};

use crate::error::CoreError;
use crate::Result;

use super::{KnnParams, KnnWeights, MatrixData};

/// Stored training instances.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KnnFitted {
    pub params: KnnParams,
    pub train_x: MatrixData,
    pub train_y: Vec<usize>,
    pub class_count: usize,
}

pub fn fit(
    params: &KnnParams,
    x: &Array2<f64>,
    y: &[usize],
    class_count: usize,
) -> Result<KnnFitted> {
    if x.nrows() == 0 {
        return Err(CoreError::Data("knn needs at least one training sample".into()));
    }
    if params.neighbor_count > x.nrows() {
        return Err(CoreError::InvalidParameter(format!(
            "k={} exceeds training size {}",
            params.neighbor_count,
            x.nrows()
        )));
    }
    Ok(KnnFitted {
        params: params.clone(),
        train_x: MatrixData::from_array(x),
        train_y: y.to_vec(),
        class_count,
    })
}

fn minkowski(a: ArrayView1<f64>, b: &[f64], p: f64) -> f64 {
    if p == 1.0 {
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
    } else if p == 2.0 {
        a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
    } else {
        a.iter().zip(b).map(|(x, y)| (x - y).abs().powf(p)).sum::<f64>().powf(1.0 / p)
    }
}

pub fn predict(fitted: &KnnFitted, x: &Array2<f64>) -> Vec<usize> {
    let n_train = fitted.train_x.rows;
    let d = fitted.train_x.cols;
    let k = fitted.params.neighbor_count;
    x.rows()
        .into_iter()
        .map(|row| {
            // distances to all training points; ties on distance break by
            // training index for determinism
            let mut dist: Vec<(f64, usize)> = (0..n_train)
                .map(|i| {
                    let start = i * d;
                    (minkowski(row, &fitted.train_x.data[start..start + d], fitted.params.minkowski_p), i)
                })
                .collect();
            dist.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
            let neighbors = &dist[..k];

            let mut votes = vec![0.0f64; fitted.class_count];
            // exact matches dominate under distance weighting
            let exact: Vec<&(f64, usize)> =
                neighbors.iter().filter(|(d, _)| *d == 0.0).collect();
            if fitted.params.weights == KnnWeights::Distance && !exact.is_empty() {
                for (_, i) in exact {
                    votes[fitted.train_y[*i]] += 1.0;
                }
            } else {
                for (dst, i) in neighbors {
                    let w = match fitted.params.weights {
                        KnnWeights::Uniform => 1.0,
                        KnnWeights::Distance => 1.0 / dst.max(1e-300),
                    };
                    votes[fitted.train_y[*i]] += w;
                }
            }
            super::tree::argmax(&votes)
        })
        .collect()
}
