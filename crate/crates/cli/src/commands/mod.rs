pub mod evaluate;
pub mod experiments;
pub mod extract;
pub mod segment;
pub mod select;
pub mod train;
pub mod tune;

use ndarray::Array2;

use rbc_core::data::{standard_scale_apply, standard_scale_fit, Dataset, ScalerStats};
use rbc_core::Result;

/// Fits the scaler on `train` and returns both splits transformed with the
/// train statistics.
pub fn scale_pair(train: &Dataset, test: &Dataset) -> Result<(Dataset, Dataset, ScalerStats)> {
    let stats = standard_scale_fit(train)?;
    let train_scaled = train.with_matrix(
        standard_scale_apply(&stats, train.x())?,
        train.feature_names().to_vec(),
    )?;
    let test_scaled = test.with_matrix(
        standard_scale_apply(&stats, test.x())?,
        test.feature_names().to_vec(),
    )?;
    Ok((train_scaled, test_scaled, stats))
}

/// Scales one dataset with its own statistics.
pub fn scale_self(ds: &Dataset) -> Result<(Dataset, ScalerStats)> {
    let stats = standard_scale_fit(ds)?;
    let scaled =
        ds.with_matrix(standard_scale_apply(&stats, ds.x())?, ds.feature_names().to_vec())?;
    Ok((scaled, stats))
}

/// Applies stored statistics to a raw matrix.
pub fn apply_scaler(stats: &ScalerStats, x: &Array2<f64>) -> Result<Array2<f64>> {
    standard_scale_apply(stats, x)
}
