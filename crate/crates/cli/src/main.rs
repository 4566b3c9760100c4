//! `rbc` — batch driver for blood smear segmentation, feature extraction,
//! model training/tuning and the three evaluation experiments.

mod commands;
mod config;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use rbc_core::metrics::Scorer;
use rbc_core::models::Family;

/// Exit codes: 0 success, 1 usage error, 2 data error, 3 partial per-item
/// failures.
pub const EXIT_OK: u8 = 0;
pub const EXIT_USAGE: u8 = 1;
pub const EXIT_DATA: u8 = 2;
pub const EXIT_PARTIAL: u8 = 3;

#[derive(Parser)]
#[command(name = "rbc", version, about = "Red blood cell morphology toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Segment micrographs into per-cell contours, masks and ROI crops.
    Segment {
        /// Directory of PNG/JPEG/BMP images (or a single image file).
        #[arg(long)]
        input: PathBuf,
        /// Output directory for sidecars and crops.
        #[arg(long)]
        out: PathBuf,
        /// Gaussian smoothing sigma in pixels.
        #[arg(long, default_value_t = 1.0)]
        sigma: f64,
        /// Disc radius of the morphological opening.
        #[arg(long, default_value_t = 2)]
        open_radius: usize,
        /// Canny hysteresis thresholds on the 0-255 scale.
        #[arg(long, default_value_t = 50.0)]
        canny_low: f64,
        #[arg(long, default_value_t = 150.0)]
        canny_high: f64,
        /// Minimum cell area in px^2.
        #[arg(long, default_value_t = 200)]
        min_area: usize,
        /// Foreground polarity: set when cells are brighter than background.
        #[arg(long, default_value_t = false)]
        invert: bool,
    },
    /// Compute the 121-feature CSV from segmented ROIs and a label file.
    Extract {
        /// Directory produced by `segment` (sidecars + crops).
        #[arg(long)]
        rois: PathBuf,
        /// Label file: JSON object or CSV mapping cell_id -> {c,e,o}.
        #[arg(long)]
        labels: PathBuf,
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Hyperparameter search on a feature CSV (treated as the training split).
    Tune {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        family: Family,
        /// JSON space file; the family's default space when omitted.
        #[arg(long)]
        space: Option<PathBuf>,
        #[arg(long, default_value = "randomized")]
        mode: String,
        #[arg(long, default_value_t = 50)]
        n_iter: usize,
        #[arg(long, default_value = "sds")]
        scorer: Scorer,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 10)]
        folds: usize,
        /// Output report JSON path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit one model on a feature CSV and save it.
    Train {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        family: Family,
        /// Parameter preset: "paper" (fine-tuned) or "baseline".
        #[arg(long, default_value = "paper")]
        preset: String,
        #[arg(long, default_value = "sds")]
        scorer: Scorer,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Optional feature subset (comma-separated names).
        #[arg(long)]
        features: Option<String>,
        /// Output model JSON path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate a saved model on a feature CSV.
    Evaluate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        input: PathBuf,
        /// Output directory for the report and confusion CSV.
        #[arg(long)]
        out: PathBuf,
    },
    /// Feature importance ranking, wrapper curve and projections.
    Select {
        #[arg(long)]
        input: PathBuf,
        /// Ranking source: "rf" or "gb".
        #[arg(long, default_value = "rf")]
        ranking: String,
        /// Family evaluated along the wrapper curve.
        #[arg(long, default_value = "cart")]
        family: Family,
        #[arg(long, default_value = "sds")]
        scorer: Scorer,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 10)]
        folds: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Experiment 1: baseline CV, fine tuning, test-set evaluation.
    Exp1 {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Experiment 2: importance ranking, wrapper selection, PCA and LDA.
    Exp2 {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Experiment 3: comparison against the rule-based baselines.
    Exp3 {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();

    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(EXIT_USAGE);
        }
    };

    if let Ok(workers) = std::env::var("RBC_WORKERS") {
        match workers.parse::<usize>() {
            Ok(n) if n > 0 => {
                if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                    log::warn!("could not set worker count: {e}");
                }
            }
            _ => {
                eprintln!("error: RBC_WORKERS must be a positive integer");
                return ExitCode::from(EXIT_USAGE);
            }
        }
    }

    let result = match cli.command {
        Command::Segment { input, out, sigma, open_radius, canny_low, canny_high, min_area, invert } => {
            commands::segment::run(&input, &out, sigma, open_radius, canny_low, canny_high, min_area, invert)
        }
        Command::Extract { rois, labels, out } => commands::extract::run(&rois, &labels, &out),
        Command::Tune { input, family, space, mode, n_iter, scorer, seed, folds, out } => {
            commands::tune::run(&input, family, space.as_deref(), &mode, n_iter, scorer, seed, folds, &out)
        }
        Command::Train { input, family, preset, scorer, seed, features, out } => {
            commands::train::run(&input, family, &preset, scorer, seed, features.as_deref(), &out)
        }
        Command::Evaluate { model, input, out } => commands::evaluate::run(&model, &input, &out),
        Command::Select { input, ranking, family, scorer, seed, folds, out } => {
            commands::select::run(&input, &ranking, family, scorer, seed, folds, &out)
        }
        Command::Exp1 { config, seed, out } => {
            config::load(&config, seed, out).and_then(|c| commands::experiments::exp1(&c))
        }
        Command::Exp2 { config, seed, out } => {
            config::load(&config, seed, out).and_then(|c| commands::experiments::exp2(&c))
        }
        Command::Exp3 { config, seed, out } => {
            config::load(&config, seed, out).and_then(|c| commands::experiments::exp3(&c))
        }
    };

    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(classify_error(&e))
        }
    }
}

/// Maps errors to exit codes: parameter/usage problems are 1, everything
/// data- or processing-related is 2.
fn classify_error(e: &rbc_core::CoreError) -> u8 {
    use rbc_core::CoreError;
    match e {
        CoreError::InvalidParameter(_) => EXIT_USAGE,
        _ => EXIT_DATA,
    }
}
