//! `train`: fit one preset model on a feature CSV and save the bundle.

use std::path::Path;

use rbc_core::data::read_feature_csv;
use rbc_core::metrics::Scorer;
use rbc_core::models::{fit, Family, ModelSpec};
use rbc_core::{CoreError, Result};

use crate::commands::scale_self;
use crate::report::{ModelBundle, BUNDLE_FORMAT_VERSION};
use crate::EXIT_OK;

pub fn run(
    input: &Path,
    family: Family,
    preset: &str,
    scorer: Scorer,
    seed: u64,
    features: Option<&str>,
    out: &Path,
) -> Result<u8> {
    let mut ds = read_feature_csv(input)?;
    if let Some(subset) = features {
        let names: Vec<String> = subset.split(',').map(|s| s.trim().to_string()).collect();
        ds = ds.select_features(&names)?;
    }
    let spec = match preset {
        "paper" => ModelSpec::paper_preset(family, scorer, seed),
        "baseline" => ModelSpec::baseline_preset(family, seed),
        other => {
            return Err(CoreError::InvalidParameter(format!(
                "preset must be paper or baseline, got {other:?}"
            )))
        }
    };
    let (scaled, scaler) = scale_self(&ds)?;
    let model = fit(&spec, &scaled)?;
    let bundle = ModelBundle { format_version: BUNDLE_FORMAT_VERSION, scaler, model };
    bundle.save(out)?;
    println!("trained {} on {} row(s) -> {}", family.as_str(), ds.n_samples(), out.display());
    Ok(EXIT_OK)
}
