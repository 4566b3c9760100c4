//! The three experiment drivers. Every report embeds the config hash, seed,
//! catalog version and the exact model specs used, so a rerun with the same
//! config is byte-identical.

use serde::Serialize;

use rbc_core::data::{read_feature_csv, split_train_test, Class, Dataset, SplitManifest};
use rbc_core::metrics::{confusion, ConfusionMatrix, MetricReport, Scorer};
use rbc_core::models::{fit, Family, ModelSpec, TrainedModel};
use rbc_core::search::{
    cross_val_score, default_space, grid_search, randomized_search, SearchResult,
};
use rbc_core::selection::{
    component_names, gb_importance, lda_fit, pca_fit, project, rf_importance, wrapper_incremental,
    ImportanceRanking, Projection, WrapperResult,
};
use rbc_core::{CoreError, Result};

use crate::commands::scale_pair;
use crate::config::{ExperimentConfig, RankingSource, SearchMode};
use crate::report::{curve_svg, metric_row, write_json, write_text, ReportHeader};
use crate::EXIT_OK;

fn load_input(config: &ExperimentConfig) -> Result<Dataset> {
    let ds = read_feature_csv(&config.input_csv)?;
    match &config.feature_subset {
        Some(subset) => ds.select_features(subset),
        None => Ok(ds),
    }
}

fn run_search(
    config: &ExperimentConfig,
    family: Family,
    train: &Dataset,
    scorer: Scorer,
) -> Result<SearchResult> {
    let space = default_space(family);
    match config.search_mode {
        SearchMode::Randomized => {
            randomized_search(&space, train, config.n_iter, config.cv_folds, scorer, config.seed)
        }
        SearchMode::Grid => grid_search(&space, train, config.cv_folds, scorer, config.seed),
    }
}

/// Fits `spec` on the (scaled) train split and evaluates on test.
fn fit_and_evaluate(
    spec: &ModelSpec,
    train: &Dataset,
    test: &Dataset,
) -> Result<(TrainedModel, ConfusionMatrix, MetricReport)> {
    let (train_s, test_s, _) = scale_pair(train, test)?;
    let model = fit(spec, &train_s)?;
    let pred = model.predict_dataset(&test_s)?;
    let cm = confusion(test_s.y(), &pred, &model.classes)?;
    let report = cm.report(Class::Circular)?;
    Ok((model, cm, report))
}

// ---------------------------------------------------------------- exp1 ----

#[derive(Debug, Serialize)]
struct Exp1Report {
    header: ReportHeader,
    split: SplitManifest,
    families: Vec<Exp1Family>,
}

#[derive(Debug, Serialize)]
struct Exp1Family {
    family: Family,
    baseline_spec: ModelSpec,
    /// Mean 10-fold CV scores of the baseline preset on the full dataset.
    baseline_cv_f: f64,
    baseline_cv_sds: f64,
    tuned: Vec<Exp1Tuned>,
}

#[derive(Debug, Serialize)]
struct Exp1Tuned {
    scorer: Scorer,
    best_spec: ModelSpec,
    cv_score: f64,
    trial_count: usize,
    confusion: ConfusionMatrix,
    test_metrics: MetricReport,
}

/// Baseline CV for all configured families, fine tuning on the 70/30 train
/// split per scorer, then test-set confusion matrices and metrics.
pub fn exp1(config: &ExperimentConfig) -> Result<u8> {
    let ds = load_input(config)?;
    std::fs::create_dir_all(&config.out_dir)?;
    let header = ReportHeader::new(&config.canonical_json(), config.seed);
    let (train, test, manifest) = split_train_test(&ds, config.train_fraction, config.seed)?;

    let mut families = Vec::new();
    for &family in &config.families {
        let baseline_spec = ModelSpec::baseline_preset(family, config.seed);
        let cv = |scorer: Scorer| -> Result<f64> {
            let scores =
                cross_val_score(&baseline_spec, &ds, config.cv_folds, scorer, config.seed)?;
            Ok(scores.iter().sum::<f64>() / scores.len() as f64)
        };
        let baseline_cv_f = cv(Scorer::FWeighted)?;
        let baseline_cv_sds = cv(Scorer::Sds)?;

        let mut tuned = Vec::new();
        for scorer in [Scorer::FWeighted, Scorer::Sds] {
            let search = run_search(config, family, &train, scorer)?;
            let (_, cm, test_metrics) = fit_and_evaluate(&search.best_spec, &train, &test)?;
            write_text(
                config.out_dir.join(format!(
                    "exp1_confusion_{}_{}.csv",
                    family.as_str(),
                    scorer.id()
                )),
                &cm.to_csv_string(),
            )?;
            tuned.push(Exp1Tuned {
                scorer,
                best_spec: search.best_spec.clone(),
                cv_score: search.best_cv_score,
                trial_count: search.trials.len(),
                confusion: cm,
                test_metrics,
            });
        }
        families.push(Exp1Family {
            family,
            baseline_spec,
            baseline_cv_f,
            baseline_cv_sds,
            tuned,
        });
    }

    let report = Exp1Report { header, split: manifest, families };
    write_json(config.out_dir.join("exp1_report.json"), &report)?;
    let text = render_exp1(&report);
    write_text(config.out_dir.join("exp1_report.txt"), &text)?;
    print!("{text}");
    Ok(EXIT_OK)
}

fn render_exp1(report: &Exp1Report) -> String {
    let mut s = format!(
        "experiment 1  (seed {}, config {})\n",
        report.split.seed, report.header.config_hash
    );
    s.push_str(&format!(
        "{:<18} {:>10} {:>10} {:>12} {:>12}\n",
        "family", "base F", "tuned F", "base SDS", "tuned SDS"
    ));
    for f in &report.families {
        let tuned_f = f
            .tuned
            .iter()
            .find(|t| t.scorer == Scorer::FWeighted)
            .map(|t| t.test_metrics.f_weighted)
            .unwrap_or(f64::NAN);
        let tuned_sds = f
            .tuned
            .iter()
            .find(|t| t.scorer == Scorer::Sds)
            .map(|t| t.test_metrics.sds)
            .unwrap_or(f64::NAN);
        s.push_str(&format!(
            "{:<18} {:>10.4} {:>10.4} {:>12.4} {:>12.4}\n",
            f.family.as_str(),
            f.baseline_cv_f,
            tuned_f,
            f.baseline_cv_sds,
            tuned_sds
        ));
    }
    s
}

// ---------------------------------------------------------------- exp2 ----

#[derive(Debug, Serialize)]
struct Exp2Report {
    header: ReportHeader,
    split: SplitManifest,
    rf_ranking: ImportanceRanking,
    gb_ranking: ImportanceRanking,
    /// Which ranking drove the wrapper runs.
    ranking_used: String,
    wrappers: Vec<Exp2Wrapper>,
    pca: Exp2ProjectionBlock,
    lda: Exp2ProjectionBlock,
    /// Selected-subset scores across every configured family (optional).
    full_comparison: Vec<Exp2FullEntry>,
}

#[derive(Debug, Serialize)]
struct Exp2Wrapper {
    family: Family,
    curve: Vec<(usize, f64)>,
    best_subset: Vec<String>,
    best_cv_score: f64,
    /// CV score of the full feature set (the curve's last point).
    all_features_cv_score: f64,
    best_spec: ModelSpec,
    confusion: ConfusionMatrix,
    test_metrics: MetricReport,
}

#[derive(Debug, Serialize)]
struct Exp2ProjectionBlock {
    ratios: Vec<f64>,
    component_cap: usize,
    entries: Vec<Exp2ProjectionEntry>,
}

#[derive(Debug, Serialize)]
struct Exp2ProjectionEntry {
    family: Family,
    components: usize,
    cv_score: f64,
    best_spec: ModelSpec,
    confusion: ConfusionMatrix,
    test_metrics: MetricReport,
}

#[derive(Debug, Serialize)]
struct Exp2FullEntry {
    family: Family,
    cv_score: f64,
    best_spec: ModelSpec,
    confusion: ConfusionMatrix,
    test_metrics: MetricReport,
}

/// Importance rankings, wrapper curves, PCA and LDA variants, and the
/// comparison table.
pub fn exp2(config: &ExperimentConfig) -> Result<u8> {
    let ds = load_input(config)?;
    std::fs::create_dir_all(&config.out_dir)?;
    let header = ReportHeader::new(&config.canonical_json(), config.seed);
    let (train, test, manifest) = split_train_test(&ds, config.train_fraction, config.seed)?;
    let scorer = config.scorer;

    // Rankings come from the fine-tuned ensemble presets fit on the scaled
    // train split.
    let (train_s, test_s, _) = scale_pair(&train, &test)?;
    let rf_model = fit(&ModelSpec::paper_preset(Family::RandomForest, scorer, config.seed), &train_s)?;
    let rf_ranking = rf_importance(&rf_model)?;
    let gb_model =
        fit(&ModelSpec::paper_preset(Family::GradientBoosting, scorer, config.seed), &train_s)?;
    let gb_ranking = gb_importance(&gb_model)?;
    let ranking = match config.ranking {
        RankingSource::Rf => &rf_ranking,
        RankingSource::Gb => &gb_ranking,
    };

    let mut wrappers = Vec::new();
    for &family in &config.wrapper_families {
        let result: WrapperResult = wrapper_incremental(
            family,
            ranking,
            &train,
            scorer,
            config.cv_folds,
            config.seed,
            None,
        )?;
        let all_features_cv_score =
            result.curve.last().map(|(_, s)| *s).unwrap_or(f64::NAN);
        let sub_train = train.select_features(&result.best_subset)?;
        let sub_test = test.select_features(&result.best_subset)?;
        let (_, cm, test_metrics) =
            fit_and_evaluate(&result.best_search.best_spec, &sub_train, &sub_test)?;

        let mut curve_csv = String::from("size,score\n");
        for (size, score) in &result.curve {
            curve_csv.push_str(&format!("{size},{score}\n"));
        }
        write_text(
            config.out_dir.join(format!("exp2_curve_{}.csv", family.as_str())),
            &curve_csv,
        )?;
        write_text(
            config.out_dir.join(format!("exp2_curve_{}.svg", family.as_str())),
            &curve_svg(&result.curve, &format!("{} {}", family.as_str(), scorer.id())),
        )?;

        wrappers.push(Exp2Wrapper {
            family,
            curve: result.curve,
            best_subset: result.best_subset,
            best_cv_score: result.best_score,
            all_features_cv_score,
            best_spec: result.best_search.best_spec,
            confusion: cm,
            test_metrics,
        });
    }

    // PCA: components searched up to the 95%-variance cap.
    let pca = pca_fit(train_s.x())?;
    let cap = pca.components_for_ratio(0.95);
    let pca_block = project_and_search(
        config,
        &pca,
        cap,
        true,
        &train_s,
        &test_s,
        scorer,
    )?;
    // LDA: at most classes-1 components, no component search.
    let lda = lda_fit(train_s.x(), train_s.y())?;
    let lda_cap = lda.component_count();
    let lda_block = project_and_search(config, &lda, lda_cap, false, &train_s, &test_s, scorer)?;

    // Optional: selected subset applied to every configured family.
    let mut full_comparison = Vec::new();
    if config.full_comparison {
        let subset = wrappers
            .first()
            .map(|w| w.best_subset.clone())
            .ok_or_else(|| CoreError::Data("no wrapper result for comparison".into()))?;
        let sub_train = train.select_features(&subset)?;
        let sub_test = test.select_features(&subset)?;
        for &family in &config.families {
            let search = grid_search(
                &default_space(family),
                &sub_train,
                config.cv_folds,
                scorer,
                config.seed,
            )?;
            let (_, cm, test_metrics) =
                fit_and_evaluate(&search.best_spec, &sub_train, &sub_test)?;
            full_comparison.push(Exp2FullEntry {
                family,
                cv_score: search.best_cv_score,
                best_spec: search.best_spec,
                confusion: cm,
                test_metrics,
            });
        }
    }

    let report = Exp2Report {
        header,
        split: manifest,
        rf_ranking,
        gb_ranking,
        ranking_used: match config.ranking {
            RankingSource::Rf => "rf".into(),
            RankingSource::Gb => "gb".into(),
        },
        wrappers,
        pca: pca_block,
        lda: lda_block,
        full_comparison,
    };
    write_json(config.out_dir.join("exp2_report.json"), &report)?;
    let text = render_exp2(&report);
    write_text(config.out_dir.join("exp2_report.txt"), &text)?;
    print!("{text}");
    Ok(EXIT_OK)
}

/// Evaluates projected variants: grid search per component count when
/// `search_components`, otherwise only at `cap`.
fn project_and_search(
    config: &ExperimentConfig,
    projection: &Projection,
    cap: usize,
    search_components: bool,
    train_s: &Dataset,
    test_s: &Dataset,
    scorer: Scorer,
) -> Result<Exp2ProjectionBlock> {
    let mut entries = Vec::new();
    for &family in &config.wrapper_families {
        let candidates: Vec<usize> =
            if search_components { (1..=cap).collect() } else { vec![cap] };
        let mut best: Option<(usize, SearchResult)> = None;
        for m in candidates {
            let p = projection.truncate(m);
            let names = component_names(p.kind, m);
            let ptrain = train_s.with_matrix(project(&p, train_s.x())?, names.clone())?;
            let result =
                grid_search(&default_space(family), &ptrain, config.cv_folds, scorer, config.seed)?;
            let better = best
                .as_ref()
                .map(|(_, b)| result.best_cv_score > b.best_cv_score)
                .unwrap_or(true);
            if better {
                best = Some((m, result));
            }
        }
        let (m, search) = best.expect("at least one component count evaluated");
        let p = projection.truncate(m);
        let names = component_names(p.kind, m);
        let ptrain = train_s.with_matrix(project(&p, train_s.x())?, names.clone())?;
        let ptest = test_s.with_matrix(project(&p, test_s.x())?, names)?;
        let (_, cm, test_metrics) = fit_and_evaluate(&search.best_spec, &ptrain, &ptest)?;
        entries.push(Exp2ProjectionEntry {
            family,
            components: m,
            cv_score: search.best_cv_score,
            best_spec: search.best_spec,
            confusion: cm,
            test_metrics,
        });
    }
    Ok(Exp2ProjectionBlock {
        ratios: projection.ratios.clone(),
        component_cap: cap,
        entries,
    })
}

fn render_exp2(report: &Exp2Report) -> String {
    let mut s = format!(
        "experiment 2  (seed {}, config {}, ranking {})\n",
        report.split.seed, report.header.config_hash, report.ranking_used
    );
    s.push_str("top ranked features:\n");
    for (name, score) in report.rf_ranking.entries.iter().take(15) {
        s.push_str(&format!("  {name:<28} {score:.4}\n"));
    }
    s.push_str(&format!(
        "{:<18} {:>12} {:>12} {:>8} {:>12} {:>12}\n",
        "family", "all feats", "selection", "size", "PCA", "LDA"
    ));
    for w in &report.wrappers {
        let pca = report
            .pca
            .entries
            .iter()
            .find(|e| e.family == w.family)
            .map(|e| e.cv_score)
            .unwrap_or(f64::NAN);
        let lda = report
            .lda
            .entries
            .iter()
            .find(|e| e.family == w.family)
            .map(|e| e.cv_score)
            .unwrap_or(f64::NAN);
        s.push_str(&format!(
            "{:<18} {:>12.4} {:>12.4} {:>8} {:>12.4} {:>12.4}\n",
            w.family.as_str(),
            w.all_features_cv_score,
            w.best_cv_score,
            w.best_subset.len(),
            pca,
            lda
        ));
    }
    if !report.full_comparison.is_empty() {
        s.push_str("selected subset across families (test metrics):\n");
        for e in &report.full_comparison {
            s.push_str(&metric_row(e.family.as_str(), &e.test_metrics));
        }
    }
    s
}

// ---------------------------------------------------------------- exp3 ----

#[derive(Debug, Serialize)]
struct Exp3Report {
    header: ReportHeader,
    split: SplitManifest,
    three_class: Vec<Exp3Entry>,
    two_class: Vec<Exp3Entry>,
}

#[derive(Debug, Serialize)]
struct Exp3Entry {
    name: String,
    spec: ModelSpec,
    confusion: ConfusionMatrix,
    metrics: MetricReport,
}

/// Comparison of the configured classifiers against the rule baselines, on
/// the three-class problem and the circular/elongated binary problem.
pub fn exp3(config: &ExperimentConfig) -> Result<u8> {
    let full = read_feature_csv(&config.input_csv)?;
    std::fs::create_dir_all(&config.out_dir)?;
    let header = ReportHeader::new(&config.canonical_json(), config.seed);
    let (train_full, test_full, manifest) =
        split_train_test(&full, config.train_fraction, config.seed)?;

    // ML classifiers may run on a selected subset; the rule baselines always
    // see the full feature table (they need their named shape features).
    let subset = config.feature_subset.clone();
    let ml_view = |ds: &Dataset| -> Result<Dataset> {
        match &subset {
            Some(names) => ds.select_features(names),
            None => Ok(ds.clone()),
        }
    };

    let mut three_class = Vec::new();
    let mut two_class = Vec::new();

    // three-class block
    let ml_train = ml_view(&train_full)?;
    let ml_test = ml_view(&test_full)?;
    for &family in &config.families {
        let spec = ModelSpec::paper_preset(family, config.scorer, config.seed);
        let (_, cm, metrics) = fit_and_evaluate(&spec, &ml_train, &ml_test)?;
        three_class.push(Exp3Entry { name: family.as_str().into(), spec, confusion: cm, metrics });
    }
    let asakura_spec = ModelSpec::paper_preset(Family::Asakura, config.scorer, config.seed);
    let (_, cm, metrics) = fit_and_evaluate(&asakura_spec, &train_full, &test_full)?;
    three_class.push(Exp3Entry {
        name: "asakura".into(),
        spec: asakura_spec,
        confusion: cm,
        metrics,
    });

    // two-class block: circular vs elongated
    let train_bin = train_full.filter_classes(&Class::BINARY)?;
    let test_bin = test_full.filter_classes(&Class::BINARY)?;
    if train_bin.classes().len() == 2 && test_bin.n_samples() > 0 {
        let ml_train_bin = ml_view(&train_bin)?;
        let ml_test_bin = ml_view(&test_bin)?;
        for &family in &config.families {
            let spec = ModelSpec::paper_preset(family, config.scorer, config.seed);
            let (_, cm, metrics) = fit_and_evaluate(&spec, &ml_train_bin, &ml_test_bin)?;
            two_class.push(Exp3Entry {
                name: family.as_str().into(),
                spec,
                confusion: cm,
                metrics,
            });
        }
        for family in [Family::CircularityRule, Family::EccentricityRule] {
            let spec = ModelSpec::paper_preset(family, config.scorer, config.seed);
            let (_, cm, metrics) = fit_and_evaluate(&spec, &train_bin, &test_bin)?;
            two_class.push(Exp3Entry {
                name: family.as_str().into(),
                spec,
                confusion: cm,
                metrics,
            });
        }
    } else {
        log::warn!("binary comparison skipped: need both circular and elongated cells");
    }

    for entry in three_class.iter().chain(&two_class) {
        let k = entry.confusion.classes.len();
        write_text(
            config.out_dir.join(format!("exp3_confusion_{}c_{}.csv", k, entry.name)),
            &entry.confusion.to_csv_string(),
        )?;
    }

    let report = Exp3Report { header, split: manifest, three_class, two_class };
    write_json(config.out_dir.join("exp3_report.json"), &report)?;
    let text = render_exp3(&report);
    write_text(config.out_dir.join("exp3_report.txt"), &text)?;
    print!("{text}");
    Ok(EXIT_OK)
}

fn render_exp3(report: &Exp3Report) -> String {
    let mut s = format!(
        "experiment 3  (seed {}, config {})\n",
        report.split.seed, report.header.config_hash
    );
    for (title, block) in
        [("three classes", &report.three_class), ("two classes", &report.two_class)]
    {
        if block.is_empty() {
            continue;
        }
        s.push_str(&format!("-- {title} --\n"));
        for e in block {
            s.push_str(&metric_row(&e.name, &e.metrics));
        }
    }
    s
}
