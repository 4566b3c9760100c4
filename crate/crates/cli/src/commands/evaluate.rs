//! `evaluate`: score a saved model bundle on a feature CSV.

use std::path::Path;

use rbc_core::data::{read_feature_csv, Class};
use rbc_core::metrics::confusion;
use rbc_core::Result;

use crate::commands::apply_scaler;
use crate::report::{write_json, write_text, ModelBundle};
use crate::EXIT_OK;

pub fn run(model_path: &Path, input: &Path, out: &Path) -> Result<u8> {
    let bundle = ModelBundle::load(model_path)?;
    let ds = read_feature_csv(input)?;
    let ds = ds.select_features(&bundle.model.feature_names)?;
    let x = apply_scaler(&bundle.scaler, ds.x())?;
    let pred = bundle.model.predict(&x, ds.feature_names())?;
    let cm = confusion(ds.y(), &pred, &bundle.model.classes)?;
    let report = cm.report(Class::Circular)?;

    std::fs::create_dir_all(out)?;
    write_json(out.join("evaluation.json"), &report)?;
    write_text(out.join("evaluation.txt"), &report.render_text())?;
    write_text(out.join("confusion.csv"), &cm.to_csv_string())?;
    print!("{}", report.render_text());
    Ok(EXIT_OK)
}
