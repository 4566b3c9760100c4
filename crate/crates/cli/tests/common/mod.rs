//! Shared fixtures for the CLI integration tests.
#![allow(dead_code)]

use std::path::Path;
use std::process::{Command, Output};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Runs the `rbc` binary with the given arguments.
pub fn rbc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rbc"))
        .args(args)
        .env("RBC_WORKERS", "2")
        .output()
        .expect("binary runs")
}

pub fn assert_exit(output: &Output, code: i32) {
    let stderr = String::from_utf8_lossy(&output.stderr);
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert_eq!(
        output.status.code(),
        Some(code),
        "exit code mismatch\nstdout:\n{stdout}\nstderr:\n{stderr}"
    );
}

/// Synthetic feature CSV with shape-like columns: circular cells score high
/// on circularity/eccentricity, elongated low, other deviates in area. The
/// remaining columns are noise.
pub fn write_synthetic_csv(path: &Path, n_per_class: usize, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = vec![
        "image,cell_id,label,Area,Perimeter,Circularity,Eccentricity,noise_a,noise_b".to_string(),
    ];
    let mut cell = 0usize;
    let mut push_row = |label: &str,
                        area: f64,
                        perimeter: f64,
                        circ: f64,
                        esf: f64,
                        rng: &mut ChaCha8Rng,
                        cell: &mut usize| {
        rows.push(format!(
            "synth,synth_cell{},{label},{area},{perimeter},{circ},{esf},{},{}",
            cell,
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        ));
        *cell += 1;
    };
    for i in 0..n_per_class {
        let j = (i % 9) as f64 * 0.004;
        push_row(
            "c",
            2800.0 + i as f64,
            190.0 + j * 100.0,
            0.93 - j,
            0.90 + j,
            &mut rng,
            &mut cell,
        );
    }
    for i in 0..n_per_class {
        let j = (i % 7) as f64 * 0.006;
        push_row(
            "e",
            1600.0 + i as f64,
            230.0 + j * 100.0,
            0.45 + j,
            0.30 + j,
            &mut rng,
            &mut cell,
        );
    }
    for i in 0..n_per_class {
        let j = (i % 5) as f64 * 0.005;
        push_row(
            "o",
            8000.0 + 10.0 * i as f64,
            400.0 + j * 100.0,
            0.75 + j,
            0.82 + j,
            &mut rng,
            &mut cell,
        );
    }
    std::fs::write(path, rows.join("\n") + "\n").unwrap();
}

/// Minimal experiment config JSON for fast test runs.
pub fn write_config(path: &Path, csv: &Path, out_dir: &Path, seed: u64) {
    let config = serde_json::json!({
        "input_csv": csv,
        "seed": seed,
        "scorer": "sds",
        "families": ["cart", "knn"],
        "search_mode": "randomized",
        "n_iter": 4,
        "cv_folds": 5,
        "train_fraction": 0.7,
        "wrapper_families": ["cart"],
        "out_dir": out_dir,
    });
    std::fs::write(path, serde_json::to_string_pretty(&config).unwrap()).unwrap();
}
