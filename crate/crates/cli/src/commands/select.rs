//! `select`: importance ranking, wrapper curve and PCA/LDA projections.

use std::path::Path;

use rbc_core::data::read_feature_csv;
use rbc_core::metrics::Scorer;
use rbc_core::models::{fit, Family, ModelSpec};
use rbc_core::selection::{
    gb_importance, lda_fit, pca_fit, rf_importance, wrapper_incremental,
};
use rbc_core::{CoreError, Result};

use crate::commands::scale_self;
use crate::report::{curve_svg, write_json, write_text};
use crate::EXIT_OK;

#[allow(clippy::too_many_arguments)]
pub fn run(
    input: &Path,
    ranking_source: &str,
    family: Family,
    scorer: Scorer,
    seed: u64,
    folds: usize,
    out: &Path,
) -> Result<u8> {
    let ds = read_feature_csv(input)?;
    let (scaled, _) = scale_self(&ds)?;
    std::fs::create_dir_all(out)?;

    let ranking = match ranking_source {
        "rf" => {
            let model = fit(&ModelSpec::paper_preset(Family::RandomForest, scorer, seed), &scaled)?;
            rf_importance(&model)?
        }
        "gb" => {
            let model =
                fit(&ModelSpec::paper_preset(Family::GradientBoosting, scorer, seed), &scaled)?;
            gb_importance(&model)?
        }
        other => {
            return Err(CoreError::InvalidParameter(format!(
                "ranking must be rf or gb, got {other:?}"
            )))
        }
    };
    write_json(out.join("ranking.json"), &ranking)?;

    let wrapper = wrapper_incremental(family, &ranking, &scaled, scorer, folds, seed, None)?;
    let mut curve_csv = String::from("size,score\n");
    for (size, score) in &wrapper.curve {
        curve_csv.push_str(&format!("{size},{score}\n"));
    }
    write_text(out.join("wrapper_curve.csv"), &curve_csv)?;
    write_text(
        out.join("wrapper_curve.svg"),
        &curve_svg(&wrapper.curve, &format!("{} {} vs feature count", family.as_str(), scorer.id())),
    )?;
    write_json(out.join("wrapper.json"), &wrapper)?;

    let pca = pca_fit(scaled.x())?;
    write_json(out.join("pca.json"), &pca)?;
    let lda = lda_fit(scaled.x(), scaled.y())?;
    write_json(out.join("lda.json"), &lda)?;

    println!(
        "selected {} feature(s) with {} ({} = {:.4}) -> {}",
        wrapper.best_subset.len(),
        family.as_str(),
        scorer.id(),
        wrapper.best_score,
        out.display()
    );
    Ok(EXIT_OK)
}
