//! Acceptance suite: one test per criterion, each printing a pass/fail line.
//!
//! Criteria 1-4 pin the metric implementations to the published reference
//! results (confusion matrices with their reported scores). Three reference
//! cells are provably inconsistent with their own published matrices under
//! every standard convention; those are asserted as *known inconsistencies*
//! so any change in the situation fails loudly. Criterion 8's determinism
//! half lives in the CLI crate's acceptance test next to the binary.

use ndarray::Array2;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use rbc_core::data::{split_train_test, Class, Dataset, Provenance};
use rbc_core::metrics::{ConfusionMatrix, Scorer};
use rbc_core::models::{
    alphas_within_box, fit, gradient_check, max_kkt_residual, Activation, CartParams, Family,
    FamilyParams, Fitted, ForestParams, MaxFeatures, MlpParams, ModelSpec,
};

// ------------------------------------------------------------------------
// Reference results: (label, confusion counts, reported percentages).
// Reported values are (SDS, weighted F, CBA, MCC); None = not published.
// ------------------------------------------------------------------------

type Reported = (Option<f64>, Option<f64>, Option<f64>, Option<f64>);

struct Golden3 {
    name: &'static str,
    counts: [[u64; 3]; 3],
    reported: Reported,
}

struct Golden2 {
    name: &'static str,
    counts: [[u64; 2]; 2],
    reported: Reported,
}

const THREE_CLASS: &[Golden3] = &[
    // full-data baselines
    Golden3 { name: "svm_base", counts: [[1496, 44, 123], [83, 596, 21], [94, 19, 219]], reported: (Some(87.24), Some(85.97), None, None) },
    Golden3 { name: "dt_base", counts: [[1535, 47, 81], [69, 564, 67], [72, 32, 228]], reported: (Some(90.02), Some(86.49), None, None) },
    Golden3 { name: "rf_base", counts: [[1580, 38, 45], [52, 636, 12], [91, 27, 214]], reported: (Some(91.61), Some(89.91), None, None) },
    Golden3 { name: "et_base", counts: [[1556, 45, 62], [72, 620, 8], [97, 29, 206]], reported: (Some(89.76), Some(89.54), None, None) },
    Golden3 { name: "gb_base", counts: [[1569, 41, 53], [60, 628, 12], [91, 26, 215]], reported: (Some(90.91), Some(89.75), None, None) },
    Golden3 { name: "knn_base", counts: [[1542, 39, 82], [109, 577, 14], [112, 31, 189]], reported: (Some(87.31), Some(85.35), None, None) },
    Golden3 { name: "mlp_base", counts: [[1485, 48, 130], [62, 598, 40], [92, 29, 211]], reported: (Some(87.68), Some(85.39), None, None) },
    // fine-tuned test-split matrices
    Golden3 { name: "rf_tuned", counts: [[490, 7, 2], [9, 197, 4], [26, 6, 68]], reported: (Some(94.56), Some(93.11), None, None) },
    Golden3 { name: "dt_tuned", counts: [[481, 8, 10], [6, 194, 10], [21, 12, 67]], reported: (Some(94.44), Some(91.62), None, None) },
    // selected-feature variants
    Golden3 { name: "svm_15", counts: [[490, 6, 3], [9, 195, 6], [25, 5, 70]], reported: (Some(94.68), Some(93.15), None, None) },
    Golden3 { name: "dt_15", counts: [[490, 5, 4], [8, 197, 5], [26, 10, 64]], reported: (Some(94.68), Some(92.55), None, None) },
    Golden3 { name: "et_15", counts: [[487, 8, 4], [7, 198, 5], [27, 5, 68]], reported: (Some(94.31), Some(92.88), None, None) },
    Golden3 { name: "knn_15", counts: [[489, 8, 2], [12, 193, 5], [30, 7, 63]], reported: (Some(93.57), Some(91.77), None, None) },
    Golden3 { name: "mlp_15", counts: [[485, 6, 8], [9, 194, 7], [19, 5, 76]], reported: (Some(94.81), Some(93.14), None, None) },
    Golden3 { name: "dt_20", counts: [[483, 13, 3], [8, 199, 3], [24, 9, 67]], reported: (Some(94.07), Some(92.37), None, None) },
    Golden3 { name: "rf_pca", counts: [[485, 9, 5], [14, 194, 2], [34, 12, 54]], reported: (Some(92.34), Some(90.06), None, None) },
    Golden3 { name: "dt_pca", counts: [[483, 9, 7], [25, 172, 13], [36, 11, 53]], reported: (Some(90.48), Some(87.02), None, None) },
    Golden3 { name: "rf_lda", counts: [[478, 9, 12], [12, 191, 7], [22, 6, 72]], reported: (Some(93.20), Some(91.55), None, None) },
    Golden3 { name: "dt_lda", counts: [[482, 9, 8], [17, 187, 6], [21, 7, 72]], reported: (Some(93.20), Some(91.49), None, None) },
    // three-class comparison block (all four metrics published)
    Golden3 { name: "gb_cmp3", counts: [[488, 6, 5], [8, 194, 8], [20, 5, 75]], reported: (Some(95.18), Some(93.50), Some(88.39), Some(88.43)) },
    Golden3 { name: "rf_cmp3", counts: [[488, 7, 4], [7, 194, 9], [22, 4, 74]], reported: (Some(95.05), Some(93.36), Some(88.06), Some(88.20)) },
    Golden3 { name: "asakura", counts: [[199, 259, 41], [0, 102, 108], [9, 67, 24]], reported: (Some(61.80), Some(45.33), Some(37.48), Some(35.43)) },
];

const TWO_CLASS: &[Golden2] = &[
    Golden2 { name: "gb_cmp2", counts: [[484, 15], [28, 282]], reported: (Some(94.68), Some(94.67), Some(93.98), Some(88.72)) },
    Golden2 { name: "rf_cmp2", counts: [[484, 15], [30, 280]], reported: (Some(94.44), Some(94.42), Some(93.66), Some(88.19)) },
    Golden2 { name: "gonzalez", counts: [[189, 310], [100, 210]], reported: (Some(49.32), Some(48.97), Some(52.81), Some(5.70)) },
    Golden2 { name: "acharya", counts: [[348, 151], [23, 287]], reported: (Some(78.49), Some(78.76), Some(81.16), Some(60.80)) },
];

/// Reference F cells whose published value cannot be derived from the
/// published matrix under any standard F aggregation (support-weighted,
/// macro, micro, prediction-weighted all miss by 0.47-6.7 pp). Pinned as
/// known inconsistencies.
const F_INCONSISTENT: &[(&str, f64)] = &[
    ("et_base", 0.881_323_802_428_460_3),
    ("gb_base", 0.892_795_126_666_571_1),
];

/// The three-class MCC of the rule-baseline matrix under the standard R_K
/// statistic; the published 35.43% is not recoverable from the matrix.
const MCC_INCONSISTENT: &[&str] = &["asakura"];

/// Rule-baseline CBA cells reproduce only under the mean-recall reading
/// (checked separately); the max(row, column) form misses them by >10 pp.
const CBA_RULE_BASELINES: &[&str] = &["asakura", "gonzalez", "acharya"];

fn cm3(g: &Golden3) -> ConfusionMatrix {
    ConfusionMatrix::from_counts(
        vec![Class::Circular, Class::Elongated, Class::Other],
        g.counts.iter().map(|r| r.to_vec()).collect(),
    )
    .unwrap()
}

fn cm2(g: &Golden2) -> ConfusionMatrix {
    ConfusionMatrix::from_counts(
        vec![Class::Circular, Class::Elongated],
        g.counts.iter().map(|r| r.to_vec()).collect(),
    )
    .unwrap()
}

fn round2(v: f64) -> f64 {
    (v * 100.0).round() / 100.0
}

fn all_matrices() -> Vec<(String, ConfusionMatrix, Reported)> {
    let mut out = Vec::new();
    for g in THREE_CLASS {
        out.push((g.name.to_string(), cm3(g), g.reported));
    }
    for g in TWO_CLASS {
        out.push((g.name.to_string(), cm2(g), g.reported));
    }
    out
}

#[test]
fn acceptance_1_sds_golden_vectors() {
    let mut checked = 0;
    for (name, cm, (sds, _, _, _)) in all_matrices() {
        let Some(reported) = sds else { continue };
        let computed = 100.0 * cm.sds_score(Class::Circular).unwrap();
        assert!(
            (round2(computed) - reported).abs() <= 0.01 + 1e-9,
            "{name}: SDS {computed:.4} vs reported {reported}"
        );
        checked += 1;
    }
    println!("[criterion 1] PASS - SDS reproduces all {checked} published pairs within 0.01 pp");
}

#[test]
fn acceptance_2_weighted_f_golden_vectors() {
    let mut checked = 0;
    let mut pinned = 0;
    for (name, cm, (_, f, _, _)) in all_matrices() {
        let Some(reported) = f else { continue };
        let computed = cm.f_weighted().unwrap();
        if let Some((_, frozen)) = F_INCONSISTENT.iter().find(|(n, _)| *n == name) {
            // implementation matches the independent formula exactly, and
            // the reference cell stays irreproducible
            assert!(
                (computed - frozen).abs() < 1e-12,
                "{name}: implementation drifted from the formula value"
            );
            assert!(
                (100.0 * computed - reported).abs() > 0.15,
                "{name}: reference cell unexpectedly matches now - re-examine"
            );
            pinned += 1;
            continue;
        }
        assert!(
            (100.0 * computed - reported).abs() <= 0.15,
            "{name}: weighted F {:.4} vs reported {reported}",
            100.0 * computed
        );
        checked += 1;
    }
    println!(
        "[criterion 2] PASS - weighted F within 0.15 pp on {checked} pairs; \
         {pinned} reference cells are internally inconsistent with their own \
         matrices (documented) and pinned at the formula values"
    );
}

#[test]
fn acceptance_3_mcc_golden_vectors() {
    // binary MCC is exact on every published pair
    for g in TWO_CLASS {
        let (_, _, _, Some(reported)) = g.reported else { continue };
        let computed = 100.0 * cm2(g).mcc().unwrap();
        assert!(
            (round2(computed) - reported).abs() <= 0.01 + 1e-9,
            "{}: binary MCC {computed:.4} vs {reported}",
            g.name
        );
    }
    // three-class R_K within 1 pp on the classifier matrices
    let mut pinned = 0;
    for g in THREE_CLASS {
        let (_, _, _, Some(reported)) = g.reported else { continue };
        let computed = 100.0 * cm3(g).mcc().unwrap();
        if MCC_INCONSISTENT.contains(&g.name) {
            // independent integer-arithmetic oracle for the R_K statistic
            let num = (325 * 809 - (208 * 499 + 428 * 210 + 173 * 100)) as f64;
            let den = (((809f64 * 809.0) - (208f64 * 208.0 + 428.0 * 428.0 + 173.0 * 173.0))
                * ((809f64 * 809.0) - (499f64 * 499.0 + 210.0 * 210.0 + 100.0 * 100.0)))
                .sqrt();
            assert!((computed / 100.0 - num / den).abs() < 1e-12, "{}: R_K drifted", g.name);
            assert!(
                (computed - reported).abs() > 1.0,
                "{}: reference cell unexpectedly matches now - re-examine",
                g.name
            );
            pinned += 1;
            continue;
        }
        assert!(
            (computed - reported).abs() <= 1.0,
            "{}: R_K {computed:.4} vs {reported}",
            g.name
        );
    }
    println!(
        "[criterion 3] PASS - binary MCC exact on 4 pairs; 3-class R_K within \
         1 pp on the classifier matrices; {pinned} rule-baseline cell uses an \
         unrecoverable convention (documented) and is pinned at the R_K value"
    );
}

#[test]
fn acceptance_4_cba_golden_vectors() {
    let mut mosley_checked = 0;
    let mut recall_checked = 0;
    for (name, cm, (_, _, cba, _)) in all_matrices() {
        let Some(reported) = cba else { continue };
        let mosley = 100.0 * cm.cba().unwrap();
        let mean_recall = 100.0 * cm.balanced_accuracy().unwrap();
        // the reference CBA column equals mean per-class recall on every
        // published pair, classifiers and baselines alike
        assert!(
            (round2(mean_recall) - reported).abs() <= 0.01 + 1e-9,
            "{name}: mean recall {mean_recall:.4} vs reported {reported}"
        );
        recall_checked += 1;
        if CBA_RULE_BASELINES.contains(&name.as_str()) {
            assert!(
                (mosley - reported).abs() > 1.5,
                "{name}: rule-baseline cell unexpectedly matches the \
                 max(row, column) form now - re-examine"
            );
        } else {
            assert!(
                (mosley - reported).abs() <= 1.5,
                "{name}: CBA {mosley:.4} vs reported {reported}"
            );
            mosley_checked += 1;
        }
    }
    println!(
        "[criterion 4] PASS - max(row, column) CBA within 1.5 pp on {mosley_checked} \
         classifier pairs; mean per-class recall reproduces all {recall_checked} \
         published cells within 0.01 pp (recovered convention, documented)"
    );
}

// ------------------------------------------------------------------------
// classifier properties
// ------------------------------------------------------------------------

fn blobs(n_per_class: usize, sigma: f64, seed: u64) -> Dataset {
    let centers = [(0.0, 0.0), (6.0, 0.0), (0.0, 6.0)];
    let classes = [Class::Circular, Class::Elongated, Class::Other];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::new();
    let mut y = Vec::new();
    let gauss = |rng: &mut ChaCha8Rng| -> f64 {
        (0..12).map(|_| rng.random_range(0.0..1.0)).sum::<f64>() - 6.0
    };
    for (c, &(cx, cy)) in centers.iter().enumerate() {
        for _ in 0..n_per_class {
            rows.push([cx + sigma * gauss(&mut rng), cy + sigma * gauss(&mut rng)]);
            y.push(classes[c]);
        }
    }
    let x = Array2::from_shape_vec((rows.len(), 2), rows.concat()).unwrap();
    Dataset::new(x, y, vec!["f0".into(), "f1".into()], Provenance::default()).unwrap()
}

#[test]
fn acceptance_5_classifier_properties() {
    // (a) MLP gradients match central finite differences
    let ds = blobs(5, 1.0, 3);
    let x = ds.x().select(ndarray::Axis(0), &[0, 3, 6, 9, 12]);
    let y = vec![0usize, 0, 1, 2, 2];
    for activation in [Activation::Identity, Activation::Relu] {
        let params = MlpParams {
            hidden: vec![10, 3],
            activation,
            learning_rate: 0.01,
            epochs: 1,
            batch_size: 5,
        };
        let err = gradient_check(&params, &x, &y, 3, 7);
        assert!(err < 1e-4, "(a) gradient error {err} ({activation:?})");
    }

    // shared benchmark: 600-point separable blobs
    let bench = blobs(200, 0.35, 42);
    let (train, test, _) = split_train_test(&bench, 0.7, 9).unwrap();

    // (b) SVM KKT residual and box constraints
    let svm = fit(&ModelSpec::paper_preset(Family::SvmRbf, Scorer::Sds, 1), &train).unwrap();
    if let Fitted::Svm(f) = &svm.fitted {
        let residual = max_kkt_residual(f);
        assert!(residual < 1e-3, "(b) KKT residual {residual}");
        assert!(alphas_within_box(f, 10.0), "(b) alphas outside [0, C]");
    } else {
        panic!("expected svm");
    }

    // (c) GB training loss monotone non-increasing
    let gb = fit(&ModelSpec::paper_preset(Family::GradientBoosting, Scorer::Sds, 1), &train)
        .unwrap();
    if let Fitted::Boosting(f) = &gb.fitted {
        for w in f.train_loss.windows(2) {
            assert!(w[1] <= w[0] + 1e-9, "(c) loss increased {} -> {}", w[0], w[1]);
        }
    } else {
        panic!("expected boosting");
    }

    // (d) single-tree forest without bootstrap reproduces CART
    for seed in 0..5u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed + 100);
        let n = 40;
        let x = Array2::from_shape_fn((n, 3), |_| rng.random_range(-2.0..2.0));
        let labels: Vec<Class> = (0..n)
            .map(|i| {
                if x[(i, 0)] + x[(i, 1)] > 0.0 {
                    Class::Circular
                } else {
                    Class::Elongated
                }
            })
            .collect();
        let names = vec!["a".into(), "b".into(), "c".into()];
        let small = Dataset::new(x, labels, names, Provenance::default()).unwrap();
        let forest_spec = ModelSpec {
            params: FamilyParams::RandomForest(ForestParams {
                tree_count: 1,
                max_depth: None,
                min_samples_leaf: 2,
                min_samples_split: 4,
                max_features: MaxFeatures::All,
                bootstrap: false,
            }),
            seed,
        };
        let cart_spec = ModelSpec {
            params: FamilyParams::Cart(CartParams {
                max_depth: None,
                min_samples_leaf: 2,
                min_samples_split: 4,
                max_features: MaxFeatures::All,
            }),
            seed,
        };
        let forest = fit(&forest_spec, &small).unwrap();
        let cart = fit(&cart_spec, &small).unwrap();
        assert_eq!(
            forest.predict_dataset(&small).unwrap(),
            cart.predict_dataset(&small).unwrap(),
            "(d) forest != cart on seed {seed}"
        );
    }

    // (e) kNN matches a brute-force oracle on 1000 random queries
    let knn_train = blobs(50, 1.0, 7);
    let knn = fit(&ModelSpec::paper_preset(Family::Knn, Scorer::Sds, 0), &knn_train).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(123);
    let queries = Array2::from_shape_fn((1000, 2), |_| rng.random_range(-3.0..9.0));
    let got = knn.predict(&queries, knn_train.feature_names()).unwrap();
    let classes = [Class::Circular, Class::Elongated, Class::Other];
    for (qi, row) in queries.rows().into_iter().enumerate() {
        let mut dist: Vec<(f64, usize)> = knn_train
            .x()
            .rows()
            .into_iter()
            .enumerate()
            .map(|(i, t)| ((row[0] - t[0]).abs() + (row[1] - t[1]).abs(), i))
            .collect();
        dist.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
        let mut votes = [0.0f64; 3];
        for (d, i) in &dist[..10] {
            let ci = classes.iter().position(|c| *c == knn_train.y()[*i]).unwrap();
            votes[ci] += 1.0 / d.max(1e-300);
        }
        let mut best = 0;
        for c in 1..3 {
            if votes[c] > votes[best] {
                best = c;
            }
        }
        assert_eq!(got[qi], classes[best], "(e) query {qi}");
    }

    // (f) every family reaches 95% test accuracy on the benchmark
    for family in Family::LEARNED {
        let spec = ModelSpec::paper_preset(family, Scorer::Sds, 3);
        let model = fit(&spec, &train).unwrap();
        let pred = model.predict_dataset(&test).unwrap();
        let acc = pred.iter().zip(test.y()).filter(|(a, b)| a == b).count() as f64
            / test.n_samples() as f64;
        assert!(acc >= 0.95, "(f) {} reached only {acc:.3}", family.as_str());
    }

    println!("[criterion 5] PASS - gradient, KKT, loss-monotonicity, forest/CART, kNN-oracle and blob-benchmark properties hold");
}

// ------------------------------------------------------------------------
// feature kernels
// ------------------------------------------------------------------------

#[test]
fn acceptance_6_feature_kernels() {
    use rbc_core::features::{glcm, glcm_features, Glcm, GlcmConfig};
    use rbc_core::imaging::{BinaryImage, GrayImage};

    // GLCM equals a pair-enumeration oracle on 50 random 8x8 patches for
    // all 12 configurations
    let configs: Vec<(usize, f64)> = [1usize, 2, 3]
        .iter()
        .flat_map(|&d| {
            [0.0f64, 45.0, 90.0, 135.0].iter().map(move |&a| (d, a.to_radians())).collect::<Vec<_>>()
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(500);
    for patch in 0..50 {
        let pixels: Vec<u8> = (0..64).map(|_| rng.random_range(0..=255) as u8).collect();
        let img = GrayImage::new(8, 8, pixels).unwrap();
        let mask = BinaryImage::new(8, 8, vec![true; 64]).unwrap();
        for &(d, angle) in &configs {
            let g = glcm(&img, &mask, d, angle, 8).unwrap();
            // oracle: direct pair enumeration over both offset directions
            let q: Vec<usize> =
                img.pixels().iter().map(|&p| (p as usize * 8) / 256).collect();
            let dd = d as isize;
            let (dx, dy) = match (angle.to_degrees().round() as i64).rem_euclid(180) {
                0 => (dd, 0),
                45 => (dd, -dd),
                90 => (0, -dd),
                _ => (-dd, -dd),
            };
            let mut counts = vec![0u64; 64];
            for y in 0..8isize {
                for x in 0..8isize {
                    for (ox, oy) in [(dx, dy), (-dx, -dy)] {
                        let (nx, ny) = (x + ox, y + oy);
                        if (0..8).contains(&nx) && (0..8).contains(&ny) {
                            counts[q[(y * 8 + x) as usize] * 8 + q[(ny * 8 + nx) as usize]] += 1;
                        }
                    }
                }
            }
            let total: u64 = counts.iter().sum();
            for (i, &c) in counts.iter().enumerate() {
                let expect = c as f64 / total as f64;
                assert!(
                    (g.p[i] - expect).abs() < 1e-12,
                    "patch {patch} d={d} angle={angle}"
                );
            }
        }
    }

    // hand-computable feature values on P = [[0, .5], [.5, 0]]
    let g = Glcm {
        levels: 2,
        config: GlcmConfig { distance: 1, angle_deg: 0 },
        p: vec![0.0, 0.5, 0.5, 0.0],
    };
    let (contrast, dissimilarity, homogeneity, energy, correlation) = glcm_features(&g);
    assert!((contrast - 1.0).abs() < 1e-12);
    assert!((dissimilarity - 1.0).abs() < 1e-12);
    assert!((homogeneity - 0.5).abs() < 1e-12);
    assert!((energy - 0.5f64.sqrt()).abs() < 1e-12);
    assert!((correlation + 1.0).abs() < 1e-12);

    // Hu invariance suite: translation exact, 90-degree rotation to 1e-3,
    // 2x scale to 2e-2 on the leading invariants
    use rbc_core::features::shape_features;
    use rbc_core::imaging::extract_contours;
    let blob = |w: usize, h: usize, f: &dyn Fn(usize, usize) -> bool| -> BinaryImage {
        let mut m = BinaryImage::empty(w, h).unwrap();
        for y in 0..h {
            for x in 0..w {
                if f(x, y) {
                    m.set(x, y, true);
                }
            }
        }
        m
    };
    let shape = |x: usize, y: usize| -> bool {
        let e1 = ((x as f64 - 28.0) / 16.0).powi(2) + ((y as f64 - 30.0) / 9.0).powi(2);
        let e2 = ((x as f64 - 40.0) / 7.0).powi(2) + ((y as f64 - 38.0) / 12.0).powi(2);
        e1 <= 1.0 || e2 <= 1.0
    };
    let base = blob(64, 64, &shape);
    let translated = blob(100, 96, &|x, y| {
        x >= 20 && y >= 25 && shape(x - 20, y - 25)
    });
    let rotated = blob(64, 64, &|x, y| shape(y, 63 - x));
    let scaled = blob(128, 128, &|x, y| shape(x / 2, y / 2));
    let features = |m: &BinaryImage| -> Vec<f64> {
        let cells = extract_contours(m, 10);
        shape_features(&cells[0]).unwrap().to_vec()
    };
    let hu_index = 24usize; // HU1..HU7 occupy indices 24..31
    let (fb, ft, fr, fs) =
        (features(&base), features(&translated), features(&rotated), features(&scaled));
    for k in 0..7 {
        let i = hu_index + k;
        assert!(
            (fb[i] - ft[i]).abs() <= 1e-12 * fb[i].abs().max(1e-12),
            "HU{} translation",
            k + 1
        );
        assert!(
            (fb[i] - fr[i]).abs() <= 1e-3 * fb[i].abs().max(1e-12),
            "HU{} rotation: {} vs {}",
            k + 1,
            fb[i],
            fr[i]
        );
    }
    for k in 0..4 {
        let i = hu_index + k;
        assert!(
            (fb[i] - fs[i]).abs() <= 2e-2 * fb[i].abs().max(1e-9),
            "HU{} scale: {} vs {}",
            k + 1,
            fb[i],
            fs[i]
        );
    }

    // color statistics against a direct-summation oracle
    use rbc_core::features::{color_features, rgb_to_hsv, rgb_to_lab};
    use rbc_core::imaging::{CellContour, Rect, RgbImage};
    let mut rng = ChaCha8Rng::seed_from_u64(321);
    let pixels: Vec<[u8; 3]> = (0..144)
        .map(|_| {
            [
                rng.random_range(0..=255),
                rng.random_range(0..=255),
                rng.random_range(0..=255),
            ]
        })
        .collect();
    let bits: Vec<bool> = (0..144).map(|_| rng.random_range(0..4) != 0).collect();
    let cell = CellContour {
        points: (0..8).map(|i| [i as f64, 0.0]).collect(),
        mask: BinaryImage::new(12, 12, bits.clone()).unwrap(),
        bbox: Rect { x: 0, y: 0, w: 12, h: 12 },
        roi: RgbImage::new(12, 12, pixels.clone()).unwrap(),
        is_split_from_cluster: false,
        touches_border: false,
    };
    let got = color_features(&cell).unwrap();
    let mut channels: Vec<Vec<f64>> = vec![Vec::new(); 9];
    for (i, rgb) in pixels.iter().enumerate() {
        if !bits[i] {
            continue;
        }
        let hsv = rgb_to_hsv(*rgb);
        let lab = rgb_to_lab(*rgb);
        for (c, v) in [
            rgb[0] as f64,
            rgb[1] as f64,
            rgb[2] as f64,
            hsv[0],
            hsv[1],
            hsv[2],
            lab[0],
            lab[1],
            lab[2],
        ]
        .iter()
        .enumerate()
        {
            channels[c].push(*v);
        }
    }
    for c in 0..9 {
        let n = channels[c].len() as f64;
        let mu = channels[c].iter().sum::<f64>() / n;
        let sd =
            (channels[c].iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / (n - 1.0)).sqrt();
        assert!((got[2 * c] - mu).abs() < 1e-10, "channel {c} mean");
        assert!((got[2 * c + 1] - sd).abs() < 1e-10, "channel {c} std");
    }

    println!("[criterion 6] PASS - GLCM oracle (50 patches x 12 configs), hand values, Hu invariance and color statistics all hold");
}

// ------------------------------------------------------------------------
// imaging kernels
// ------------------------------------------------------------------------

#[test]
fn acceptance_7_imaging_kernels() {
    use rbc_core::imaging::{
        extract_contours, morphological_open, otsu_threshold, split_overlapping, BinaryImage,
        GrayImage, SplitParams,
    };

    // Otsu equals the 256-candidate brute force on 100 random histograms
    let mut rng = ChaCha8Rng::seed_from_u64(900);
    for _ in 0..100 {
        let pixels: Vec<u8> = (0..1024).map(|_| rng.random_range(0..=255) as u8).collect();
        let img = GrayImage::new(32, 32, pixels).unwrap();
        let got = otsu_threshold(&img).threshold;
        let mut hist = [0u64; 256];
        for &p in img.pixels() {
            hist[p as usize] += 1;
        }
        let total: f64 = hist.iter().map(|&c| c as f64).sum();
        let mut best = (0u8, f64::NEG_INFINITY);
        for t in 0..=255usize {
            let w0: f64 = hist[..=t].iter().map(|&c| c as f64).sum();
            let w1 = total - w0;
            if w0 == 0.0 || w1 == 0.0 {
                continue;
            }
            let mu0: f64 = hist[..=t]
                .iter()
                .enumerate()
                .map(|(v, &c)| v as f64 * c as f64)
                .sum::<f64>()
                / w0;
            let mu1: f64 = hist[t + 1..]
                .iter()
                .enumerate()
                .map(|(v, &c)| (v + t + 1) as f64 * c as f64)
                .sum::<f64>()
                / w1;
            let var = w0 * w1 * (mu0 - mu1) * (mu0 - mu1);
            if var > best.1 {
                best = (t as u8, var);
            }
        }
        assert_eq!(got, best.0, "otsu vs brute force");
    }

    // opening idempotent and anti-extensive on 100 random masks
    for seed in 0..100u64 {
        let mut mask_rng = ChaCha8Rng::seed_from_u64(seed);
        let pixels: Vec<bool> = (0..576).map(|_| mask_rng.random_range(0..100) < 45).collect();
        let mask = BinaryImage::new(24, 24, pixels).unwrap();
        let once = morphological_open(&mask, 2).unwrap();
        let twice = morphological_open(&once, 2).unwrap();
        assert_eq!(once, twice, "idempotence (seed {seed})");
        assert!(once.subset_of(&mask), "anti-extensive (seed {seed})");
    }

    // synthetic two-disc overlap splits into two cells with centers within
    // 15% of a radius
    let r = 30.0f64;
    let d = 1.2 * r;
    let (c1, c2) = ((70.0, 100.0), (70.0 + d, 100.0));
    let mut mask = BinaryImage::empty(200, 200).unwrap();
    for y in 0..200 {
        for x in 0..200 {
            let (xf, yf) = (x as f64, y as f64);
            if (xf - c1.0).powi(2) + (yf - c1.1).powi(2) <= r * r
                || (xf - c2.0).powi(2) + (yf - c2.1).powi(2) <= r * r
            {
                mask.set(x, y, true);
            }
        }
    }
    let contours = extract_contours(&mask, 10);
    assert_eq!(contours.len(), 1);
    let out = split_overlapping(&contours[0], &SplitParams::default());
    assert_eq!(out.len(), 2, "two-disc cluster must split into two cells");
    let mut centers: Vec<[f64; 2]> = out.iter().map(|c| c.centroid()).collect();
    centers.sort_by(|a, b| a[0].partial_cmp(&b[0]).unwrap());
    for (got, want) in centers.iter().zip([c1, c2]) {
        let err = (got[0] - want.0).hypot(got[1] - want.1);
        assert!(err <= 0.15 * r, "center {got:?} vs {want:?} (err {err:.2})");
    }

    println!("[criterion 7] PASS - Otsu brute-force equality (100 histograms), opening properties (100 masks), two-disc split accuracy");
}

#[test]
fn acceptance_8_cv_scaler_leakage_sentinel() {
    // The determinism half of criterion 8 runs in the CLI crate against the
    // real binary; this is the scaler-leakage sentinel.
    use rbc_core::data::kfold;
    use rbc_core::search::prepare_fold;

    let n = 50;
    let mut values: Vec<f64> = (0..n).map(|i| i as f64 * 0.1).collect();
    let outlier_row = 13;
    values[outlier_row] = 1.0e6;
    let x = Array2::from_shape_vec((n, 1), values).unwrap();
    let y: Vec<Class> = (0..n)
        .map(|i| if i % 2 == 0 { Class::Circular } else { Class::Elongated })
        .collect();
    let ds = Dataset::new(x, y, vec!["f".into()], Provenance::default()).unwrap();
    let folds = kfold(n, 10, 3, Some(ds.y())).unwrap();
    let mut outlier_validated = false;
    for (train_idx, valid_idx) in &folds {
        let (_, _, stats) = prepare_fold(&ds, train_idx, valid_idx).unwrap();
        if valid_idx.contains(&outlier_row) {
            outlier_validated = true;
            assert!(stats.mean[0] < 100.0, "fold scaler leaked the validation outlier");
        }
    }
    assert!(outlier_validated);
    println!("[criterion 8] PASS - fold scalers never see validation rows (determinism half lives in the CLI acceptance test)");
}

#[test]
fn acceptance_9_soft_reproduction_target() {
    // Soft, non-gating: when a real feature CSV is supplied, report the
    // fine-tuned RF SDS on the documented 15-feature subset.
    let path = std::env::var("RBC_FEATURES_CSV")
        .map(std::path::PathBuf::from)
        .unwrap_or_else(|_| std::path::PathBuf::from("data/features.csv"));
    if !path.exists() {
        println!(
            "[criterion 9] SKIP - no feature CSV at {} (set RBC_FEATURES_CSV to record the soft target)",
            path.display()
        );
        return;
    }
    let run = || -> rbc_core::Result<(f64, usize)> {
        let ds = rbc_core::data::read_feature_csv(&path)?;
        let subset: Vec<String> = [
            "Aspect ratio",
            "Elongation",
            "R factor",
            "HU1",
            "Roundness",
            "HU2",
            "Minor axis",
            "Shape",
            "FD1",
            "Circularity",
            "Min feret",
            "HU7",
            "HU3",
            "Compactness",
            "Skewness",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect();
        let ds = ds.select_features(&subset)?;
        let (train, test, _) = split_train_test(&ds, 0.7, 42)?;
        let spec = ModelSpec::paper_preset(Family::RandomForest, Scorer::Sds, 42);
        let stats = rbc_core::data::standard_scale_fit(&train)?;
        let train_s = train.with_matrix(
            rbc_core::data::standard_scale_apply(&stats, train.x())?,
            train.feature_names().to_vec(),
        )?;
        let test_s = test.with_matrix(
            rbc_core::data::standard_scale_apply(&stats, test.x())?,
            test.feature_names().to_vec(),
        )?;
        let model = fit(&spec, &train_s)?;
        let pred = model.predict_dataset(&test_s)?;
        let cm = rbc_core::metrics::confusion(test_s.y(), &pred, &model.classes)?;
        Ok((cm.sds_score(Class::Circular)?, test_s.n_samples()))
    };
    match run() {
        Ok((sds, n)) => {
            let verdict = if sds >= 0.90 { "meets" } else { "below" };
            println!(
                "[criterion 9] RECORDED - fine-tuned RF, 15 features: SDS {:.4} on {n} test cells ({verdict} the 0.90 soft target; reported, not asserted)",
                sds
            );
        }
        Err(e) => println!("[criterion 9] RECORDED - could not evaluate: {e}"),
    }
}
