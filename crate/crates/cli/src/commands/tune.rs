//! `tune`: hyperparameter search on a feature CSV.

use std::path::Path;

use rbc_core::data::read_feature_csv;
use rbc_core::metrics::Scorer;
use rbc_core::models::Family;
use rbc_core::search::{default_space, grid_search, randomized_search, ParamSpace};
use rbc_core::{CoreError, Result};

use crate::commands::scale_self;
use crate::report::write_json;
use crate::EXIT_OK;

#[allow(clippy::too_many_arguments)]
pub fn run(
    input: &Path,
    family: Family,
    space_path: Option<&Path>,
    mode: &str,
    n_iter: usize,
    scorer: Scorer,
    seed: u64,
    folds: usize,
    out: &Path,
) -> Result<u8> {
    let ds = read_feature_csv(input)?;
    let (scaled, _) = scale_self(&ds)?;
    let space: ParamSpace = match space_path {
        Some(p) => {
            let text = std::fs::read_to_string(p)?;
            serde_json::from_str(&text)?
        }
        None => default_space(family),
    };
    if space.family != family {
        return Err(CoreError::InvalidParameter(format!(
            "space file targets {}, requested {}",
            space.family.as_str(),
            family.as_str()
        )));
    }
    let result = match mode {
        "randomized" => randomized_search(&space, &scaled, n_iter, folds, scorer, seed)?,
        "grid" => grid_search(&space, &scaled, folds, scorer, seed)?,
        other => {
            return Err(CoreError::InvalidParameter(format!(
                "mode must be randomized or grid, got {other:?}"
            )))
        }
    };
    write_json(out, &result)?;
    println!(
        "tuned {} over {} trial(s): best {} = {:.4} -> {}",
        family.as_str(),
        result.trials.len(),
        result.scorer.id(),
        result.best_cv_score,
        out.display()
    );
    Ok(EXIT_OK)
}
