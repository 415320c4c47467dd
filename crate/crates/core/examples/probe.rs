//! Scratch probe: measures the identity/activity landscape of the synthetic
//! benchmark for hand-built feature families, the RFE path, and cheap GA
//! runs. Not part of the test suite.

use std::time::Instant;

use vitalsel::baselines::rfe_path;
use vitalsel::cli::{baseline_training, cli_split};
use vitalsel::evalproto::{pick_solution, run_logo};
use vitalsel::features::{extract_from_records, CatalogConfig, FeatureMatrix};
use vitalsel::fitness::{FitnessConfig, FitnessContext};
use vitalsel::nsga2::{evolve, FeatureMask, GaConfig, ObjectiveMode};
use vitalsel::sigsynth::{synthesize_dataset, Activity, Position};

const BENCH_SEED: u64 = 2026;
const LOGO_SEED: u64 = 77;
const LOGO_REPEATS: usize = 5;

const CLEAN: [&str; 28] = [
    "mean",
    "min",
    "max",
    "std",
    "variance",
    "median",
    "q1",
    "q3",
    "iqr",
    "range",
    "rms",
    "snr",
    "slope",
    "energy",
    "skewness",
    "total_power",
    "spectral_entropy",
    "hist_entropy",
    "spectral_flatness",
    "peak_amp_mean",
    "peak_amp_std",
    "rise_fall_ratio",
    "peak_amp_median",
    "peak_amp_min",
    "peak_amp_max",
    "peak_amp_range",
    "peak_amp_cv",
    "ibi_cv",
];

fn family(name: &str) -> &'static str {
    if name.starts_with("cardiac_") {
        return "cardiac";
    }
    let suffix = name.split_once('_').map_or(name, |(_, s)| s);
    if CLEAN.contains(&suffix) {
        "clean"
    } else {
        "rate"
    }
}

fn mask_by(features: &FeatureMatrix, pred: impl Fn(&str) -> bool) -> FeatureMask {
    FeatureMask::new(features.names.iter().map(|n| pred(n)).collect())
}

fn composition(features: &FeatureMatrix, mask: &FeatureMask) -> String {
    let mut counts = [0usize; 3];
    for (name, &bit) in features.names.iter().zip(&mask.bits) {
        if bit {
            match family(name) {
                "cardiac" => counts[0] += 1,
                "clean" => counts[1] += 1,
                _ => counts[2] += 1,
            }
        }
    }
    format!("cardiac {} clean {} rate {}", counts[0], counts[1], counts[2])
}

fn main() {
    let t0 = Instant::now();
    let records = synthesize_dataset(
        BENCH_SEED,
        50,
        &Activity::ALL,
        &Position::ALL,
        30.0,
        20.0,
    )
    .unwrap();
    let features = extract_from_records(&records, &CatalogConfig::default()).unwrap();
    println!("extracted {} rows in {:.1?}", features.n_rows(), t0.elapsed());

    let split = cli_split(&features, BENCH_SEED).unwrap();
    let ctx = FitnessContext::new(
        &features,
        &split.train_subjects,
        &split.validation_subjects,
        FitnessConfig::new(BENCH_SEED),
    )
    .unwrap();

    let fit = |mask: &FeatureMask| {
        let [o1, o2, _] = ctx.evaluate(mask).unwrap();
        (o1, 1.0 - o2)
    };

    // Family landscape: fitness view and LOGO view.
    let full = FeatureMask::full(features.n_cols());
    let cardiac = mask_by(&features, |n| family(n) == "cardiac");
    let clean = mask_by(&features, |n| family(n) == "clean");
    let rate = mask_by(&features, |n| family(n) == "rate");
    let cardiac_clean = mask_by(&features, |n| family(n) != "rate");
    for (label, mask) in [
        ("full", &full),
        ("cardiac", &cardiac),
        ("clean", &clean),
        ("rate", &rate),
        ("card+cln", &cardiac_clean),
    ] {
        let t = Instant::now();
        let (fr, fi) = fit(mask);
        let report = run_logo(&features, Some(mask), LOGO_REPEATS, LOGO_SEED).unwrap();
        println!(
            "{label:>9} ({:3}): LOGO rec {:.3} id {:.3} | fit rec {:.3} id {:.3} | {:.1?}",
            mask.count_ones(),
            report.recognition_accuracy,
            report.identification_accuracy.unwrap(),
            fr,
            fi,
            t.elapsed()
        );
    }

    // Single identity carriers must be weak on their own.
    for single in ["cardiac_ibi_mean", "cardiac_rate_per_min", "cardiac_dom_freq"] {
        let mask = mask_by(&features, |n| n == single);
        let (fr, fi) = fit(&mask);
        println!("{single:>22}: fit rec {fr:.3} id {fi:.3}");
    }

    // RFE path: do rate features survive into the top 50/100?
    let t = Instant::now();
    let (train, y) = baseline_training(&features, &split).unwrap();
    let rfe_masks = rfe_path(&train.data, train.n_cols(), &y, &[50, 100], 10, BENCH_SEED).unwrap();
    for (mask, label) in rfe_masks.iter().zip(["rfe50", "rfe100"]) {
        let report = run_logo(&features, Some(mask), LOGO_REPEATS, LOGO_SEED).unwrap();
        println!(
            "{label:>9} ({:3}): LOGO rec {:.3} id {:.3} | {} | {:.1?}",
            mask.count_ones(),
            report.recognition_accuracy,
            report.identification_accuracy.unwrap(),
            composition(&features, mask),
            t.elapsed()
        );
    }

    // GA dynamics: forward at real fitness depth, surrogate and reversed cheap.
    for (label, mode, gens, trees, surrogate) in [
        ("forward", ObjectiveMode::SuppressIdentity, 30usize, 50, false),
        ("surrogate", ObjectiveMode::SuppressIdentity, 30, 50, true),
        ("reversed", ObjectiveMode::SuppressActivity, 45, 15, false),
    ] {
        let t = Instant::now();
        let mut fit_cfg = FitnessConfig::new(BENCH_SEED);
        fit_cfg.objective_mode = mode;
        fit_cfg.fitness_trees = trees;
        fit_cfg.surrogate = surrogate;
        let ga_ctx = FitnessContext::new(
            &features,
            &split.train_subjects,
            &split.validation_subjects,
            fit_cfg,
        )
        .unwrap();
        let mut ga = GaConfig::new(features.n_cols(), 50, gens, BENCH_SEED);
        ga.objective_mode = mode;
        let archive = evolve(&ga, |m| ga_ctx.objectives(m)).unwrap();
        let picked = pick_solution(&archive).unwrap().mask.clone();
        let report = run_logo(&features, Some(&picked), LOGO_REPEATS, LOGO_SEED).unwrap();
        println!(
            "{label:>9} ({:3}): LOGO rec {:.3} id {:.3} | {} | archive {} | {:.1?}",
            picked.count_ones(),
            report.recognition_accuracy,
            report.identification_accuracy.unwrap(),
            composition(&features, &picked),
            archive.len(),
            t.elapsed()
        );
    }
}
