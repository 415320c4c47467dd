//! Experiment protocols and reporting: subject splits, leave-one-group-out
//! (LOGO), leave-one-subject-out (LOSO), the fixed train/test split, GA
//! parameter sweeps, and plot-ready comparison tables.
//!
//! Every protocol asserts subject-disjointness between recognition train and
//! test rows, reports the micro-averaged accuracy (trace over total of the
//! summed confusion matrix, so the identity `accuracy == trace/total` holds
//! exactly), and is reproducible from its seed. Wall-clock numbers never
//! enter reports; timing goes to the opt-in GA telemetry log instead.

use std::collections::HashSet;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::classifiers::{confusion, forest_fit, forest_predict, ConfusionMatrix, ForestConfig};
use crate::error::{Error, Result};
use crate::features::FeatureMatrix;
use crate::fitness::{activity_class, FitnessConfig, FitnessContext};
use crate::nsga2::{evolve, FeatureMask, GaConfig, Individual, ObjectiveMode, ParetoArchive};
use crate::preprocess::{apply_scaler, fit_scaler, impute};
use crate::seeds;
use crate::sigsynth::Activity;

const TAG_LOGO_SHUFFLE: u64 = 0x6c6f676f; // per-repeat group shuffle
const TAG_LOSO_FOREST: u64 = 0x6c6f736f; // per-fold recognition forest
const TAG_SWEEP_SPLIT: u64 = 0x73777370; // per-repeat subject split
const TAG_SWEEP_GA: u64 = 0x73776761; // per-cell, per-repeat GA stream

/// Held-out group size for LOGO and the fixed split.
pub const GROUP_SIZE: usize = 4;
/// Trees per reporting forest; evolution uses the smaller fitness default.
pub const REPORT_TREES: usize = 100;

/// Disjoint subject partition for the fixed-split protocol.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_subjects: Vec<u32>,
    pub validation_subjects: Vec<u32>,
    pub test_subjects: Vec<u32>,
    pub group_size: usize,
}

/// Uniform random partition of `subject_ids` into (train, validation, test).
pub fn split_subjects(
    subject_ids: &[u32],
    rng: &mut impl Rng,
    sizes: (usize, usize, usize),
) -> Result<SplitSpec> {
    let (n_train, n_val, n_test) = sizes;
    if subject_ids.len() != n_train + n_val + n_test {
        return Err(Error::InvalidConfig(format!(
            "{} subjects cannot split into {n_train}+{n_val}+{n_test}",
            subject_ids.len()
        )));
    }
    let distinct: HashSet<u32> = subject_ids.iter().copied().collect();
    if distinct.len() != subject_ids.len() {
        return Err(Error::Data("duplicate subject ids in split input".into()));
    }
    let mut ids = subject_ids.to_vec();
    ids.shuffle(rng);
    let mut take = |n: usize| -> Vec<u32> {
        let mut part: Vec<u32> = ids.drain(..n).collect();
        part.sort_unstable();
        part
    };
    Ok(SplitSpec {
        train_subjects: take(n_train),
        validation_subjects: take(n_val),
        test_subjects: take(n_test),
        group_size: n_test,
    })
}

/// Aggregated outcome of one protocol run. Accuracies are micro-averages of
/// the summed confusion matrices.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub protocol: String,
    /// Repeats for LOGO, folds for LOSO, 1 for the fixed split.
    pub runs: usize,
    pub recognition_accuracy: f64,
    /// Absent under LOSO (undefined for singleton test subjects).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub identification_accuracy: Option<f64>,
    pub recognition_per_run: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub identification_per_run: Option<Vec<f64>>,
    pub recognition_confusion: ConfusionMatrix,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub identification_confusion: Option<ConfusionMatrix>,
    /// Names of the selected features; absent when the full catalog ran.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mask: Option<Vec<String>>,
    pub n_features_used: usize,
    /// Echo of the inputs that produced this report.
    pub config: serde_json::Value,
}

impl ExperimentReport {
    /// Write `{stem}.json` plus confusion CSVs into `dir`. LOSO additionally
    /// gets a row-normalized recognition matrix (rates after summing).
    pub fn write(&self, dir: &Path, stem: &str) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let json = serde_json::to_string_pretty(self)?;
        std::fs::write(dir.join(format!("{stem}.json")), json + "\n")?;
        self.recognition_confusion
            .to_csv(&dir.join(format!("{stem}_recognition_confusion.csv")))?;
        if let Some(idc) = &self.identification_confusion {
            idc.to_csv(&dir.join(format!("{stem}_identification_confusion.csv")))?;
        }
        if self.protocol == "loso" {
            let k = self.recognition_confusion.n_classes();
            let rates = self.recognition_confusion.row_normalized();
            let mut text = String::from("truth");
            for l in &self.recognition_confusion.labels {
                text.push(',');
                text.push_str(l);
            }
            text.push('\n');
            for i in 0..k {
                text.push_str(&self.recognition_confusion.labels[i]);
                for j in 0..k {
                    let v = rates[i * k + j];
                    text.push_str(&format!(",{v}"));
                }
                text.push('\n');
            }
            std::fs::write(
                dir.join(format!("{stem}_recognition_confusion_normalized.csv")),
                text,
            )?;
        }
        Ok(())
    }
}

fn activity_labels() -> Vec<String> {
    Activity::ALL.iter().map(|a| a.as_str().to_string()).collect()
}

fn apply_mask(features: &FeatureMatrix, mask: Option<&FeatureMask>) -> Result<FeatureMatrix> {
    match mask {
        None => Ok(features.clone()),
        Some(m) => {
            if m.len() != features.n_cols() {
                return Err(Error::DimensionMismatch(format!(
                    "mask has {} bits, feature matrix has {} columns",
                    m.len(),
                    features.n_cols()
                )));
            }
            if m.count_ones() == 0 {
                return Err(Error::EmptyInput("mask selects no features".into()));
            }
            features.select_columns(&m.bits)
        }
    }
}

fn mask_names(features: &FeatureMatrix, mask: Option<&FeatureMask>) -> Option<Vec<String>> {
    mask.map(|m| {
        m.indices()
            .into_iter()
            .map(|i| features.names[i].clone())
            .collect()
    })
}

fn sorted_subjects(features: &FeatureMatrix) -> Vec<u32> {
    let mut ids: Vec<u32> = features
        .meta
        .iter()
        .map(|m| m.subject_id)
        .collect::<HashSet<_>>()
        .into_iter()
        .collect();
    ids.sort_unstable();
    ids
}

/// One train/held-out evaluation of both tasks; the shared reporting core of
/// LOGO and the fixed split.
fn evaluate_fold(
    masked: &FeatureMatrix,
    train_ids: &[u32],
    held_ids: &[u32],
    seed: u64,
) -> Result<(f64, ConfusionMatrix, f64, ConfusionMatrix)> {
    let held_set: HashSet<u32> = held_ids.iter().copied().collect();
    assert!(
        train_ids.iter().all(|s| !held_set.contains(s)),
        "subject leaked across the train/test boundary"
    );
    let mut cfg = FitnessConfig::new(seed);
    cfg.fitness_trees = REPORT_TREES;
    let ctx = FitnessContext::new(masked, train_ids, held_ids, cfg)?;
    let detail = ctx.evaluate_detailed(&FeatureMask::full(masked.n_cols()))?;

    let rec_conf = confusion(&detail.rec_pred, &detail.rec_truth, &activity_labels())?;
    let id_labels: Vec<String> = detail.id_subjects.iter().map(|s| format!("s{s:03}")).collect();
    let id_conf = confusion(&detail.id_pred, &detail.id_truth, &id_labels)?;
    Ok((
        rec_conf.accuracy(),
        rec_conf,
        id_conf.accuracy(),
        id_conf,
    ))
}

/// Leave-one-group-out: per repeat, shuffle subjects, hold out a group of
/// [`GROUP_SIZE`], train recognition on the rest, and run identification
/// within the held-out group (sitting rows train, lying rows test).
pub fn run_logo(
    features: &FeatureMatrix,
    mask: Option<&FeatureMask>,
    repeats: usize,
    seed: u64,
) -> Result<ExperimentReport> {
    if repeats == 0 {
        return Err(Error::InvalidConfig("repeats must be >= 1".into()));
    }
    let subjects = sorted_subjects(features);
    if subjects.len() < 2 * GROUP_SIZE {
        return Err(Error::Data(format!(
            "LOGO needs at least {} subjects, got {}",
            2 * GROUP_SIZE,
            subjects.len()
        )));
    }
    let masked = apply_mask(features, mask)?;

    let mut rec_sum = ConfusionMatrix::zeros(activity_labels());
    let mut id_sum: Option<ConfusionMatrix> = None;
    let mut rec_per = Vec::with_capacity(repeats);
    let mut id_per = Vec::with_capacity(repeats);
    for r in 0..repeats {
        let mut order = subjects.clone();
        order.shuffle(&mut seeds::stream_rng(seed, &[TAG_LOGO_SHUFFLE, r as u64]));
        let mut held: Vec<u32> = order[..GROUP_SIZE].to_vec();
        let mut train: Vec<u32> = order[GROUP_SIZE..].to_vec();
        held.sort_unstable();
        train.sort_unstable();
        let (rec_acc, rec_conf, id_acc, id_conf) = evaluate_fold(&masked, &train, &held, seed)?;
        rec_sum.merge(&rec_conf)?;
        rec_per.push(rec_acc);
        id_per.push(id_acc);
        // Held-out groups differ across repeats, so identification labels are
        // positional: class i of each repeat sums into slot i.
        let anon = ConfusionMatrix {
            labels: (0..GROUP_SIZE).map(|i| format!("member_{i}")).collect(),
            counts: id_conf.counts,
        };
        match &mut id_sum {
            None => id_sum = Some(anon),
            Some(m) => m.merge(&anon)?,
        }
    }
    let id_sum = id_sum.unwrap();
    Ok(ExperimentReport {
        protocol: "logo".into(),
        runs: repeats,
        recognition_accuracy: rec_sum.accuracy(),
        identification_accuracy: Some(id_sum.accuracy()),
        recognition_per_run: rec_per,
        identification_per_run: Some(id_per),
        recognition_confusion: rec_sum,
        identification_confusion: Some(id_sum),
        mask: mask_names(features, mask),
        n_features_used: masked.n_cols(),
        config: serde_json::json!({
            "protocol": "logo",
            "repeats": repeats,
            "seed": seed,
            "group_size": GROUP_SIZE,
            "trees": REPORT_TREES,
        }),
    })
}

/// Leave-one-subject-out recognition: one fold per subject, no
/// identification task. The reported confusion is summed over folds; the
/// normalized view is written alongside it (rates computed after summing).
pub fn run_loso(
    features: &FeatureMatrix,
    mask: Option<&FeatureMask>,
    seed: u64,
) -> Result<ExperimentReport> {
    let subjects = sorted_subjects(features);
    if subjects.len() < 2 {
        return Err(Error::Data("LOSO needs at least 2 subjects".into()));
    }
    let masked = apply_mask(features, mask)?;

    let mut rec_sum = ConfusionMatrix::zeros(activity_labels());
    let mut rec_per = Vec::with_capacity(subjects.len());
    for (fold, &held) in subjects.iter().enumerate() {
        let mut train = masked.filter_rows(|m| m.subject_id != held);
        let mut eval = masked.filter_rows(|m| m.subject_id == held);
        assert!(
            train.meta.iter().all(|m| m.subject_id != held),
            "subject leaked across the train/test boundary"
        );
        impute(&mut train);
        let scaler = fit_scaler(&train)?;
        apply_scaler(&scaler, &mut train)?;
        impute(&mut eval);
        apply_scaler(&scaler, &mut eval)?;

        let train_y: Vec<u16> = train.meta.iter().map(|m| activity_class(m.activity)).collect();
        let eval_y: Vec<u16> = eval.meta.iter().map(|m| activity_class(m.activity)).collect();
        let forest_seed = u64::from_le_bytes(
            seeds::derive_seed(seed, &[TAG_LOSO_FOREST, fold as u64])[..8]
                .try_into()
                .unwrap(),
        );
        let cfg = ForestConfig::with_trees(forest_seed, REPORT_TREES);
        let model = forest_fit(&train.data, train.n_cols(), &train_y, &cfg)?;
        let pred = forest_predict(&model, &eval.data)?;
        let conf = confusion(&pred, &eval_y, &activity_labels())?;
        rec_per.push(conf.accuracy());
        rec_sum.merge(&conf)?;
    }
    Ok(ExperimentReport {
        protocol: "loso".into(),
        runs: subjects.len(),
        recognition_accuracy: rec_sum.accuracy(),
        identification_accuracy: None,
        recognition_per_run: rec_per,
        identification_per_run: None,
        recognition_confusion: rec_sum,
        identification_confusion: None,
        mask: mask_names(features, mask),
        n_features_used: masked.n_cols(),
        config: serde_json::json!({
            "protocol": "loso",
            "seed": seed,
            "trees": REPORT_TREES,
        }),
    })
}

/// Fixed-split evaluation: recognition trained on the train subjects and
/// scored on the test group; identification within the test group.
/// Validation subjects are reserved for evolution and stay unused here.
pub fn run_split(
    features: &FeatureMatrix,
    mask: Option<&FeatureMask>,
    split: &SplitSpec,
    seed: u64,
) -> Result<ExperimentReport> {
    let masked = apply_mask(features, mask)?;
    let (rec_acc, rec_conf, id_acc, id_conf) =
        evaluate_fold(&masked, &split.train_subjects, &split.test_subjects, seed)?;
    Ok(ExperimentReport {
        protocol: "split".into(),
        runs: 1,
        recognition_accuracy: rec_acc,
        identification_accuracy: Some(id_acc),
        recognition_per_run: vec![rec_acc],
        identification_per_run: Some(vec![id_acc]),
        recognition_confusion: rec_conf,
        identification_confusion: Some(id_conf),
        mask: mask_names(features, mask),
        n_features_used: masked.n_cols(),
        config: serde_json::json!({
            "protocol": "split",
            "seed": seed,
            "trees": REPORT_TREES,
            "train_subjects": split.train_subjects,
            "test_subjects": split.test_subjects,
        }),
    })
}

/// Single-solution rule for Pareto archives: maximize O3, ties broken by
/// higher O1, then first archive order.
pub fn pick_solution(archive: &ParetoArchive) -> Option<&Individual> {
    archive.members().iter().reduce(|best, cand| {
        let b = (best.objectives[2], best.objectives[0]);
        let c = (cand.objectives[2], cand.objectives[0]);
        if c > b {
            cand
        } else {
            best
        }
    })
}

/// Grid sweep settings. Splits depend only on (seed, repeat), so every grid
/// cell sees the same panel of splits.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepConfig {
    pub pop_sizes: Vec<usize>,
    pub gen_counts: Vec<usize>,
    #[serde(default = "default_sweep_repeats")]
    pub repeats: usize,
    pub seed: u64,
    #[serde(default)]
    pub surrogate: bool,
    #[serde(default)]
    pub objective_mode: ObjectiveMode,
    /// Trees per forest during evolution (reporting always uses
    /// [`REPORT_TREES`]).
    #[serde(default = "default_sweep_trees")]
    pub fitness_trees: usize,
}

fn default_sweep_repeats() -> usize {
    10
}

fn default_sweep_trees() -> usize {
    50
}

/// One sweep cell: mean accuracies over repeats of split -> evolve -> pick
/// -> test-group evaluation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepRow {
    pub population_size: usize,
    pub generations: usize,
    pub recognition_accuracy: f64,
    pub identification_accuracy: f64,
}

/// Full-pipeline parameter sweep over population sizes and generation
/// counts.
pub fn sweep_ga(features: &FeatureMatrix, cfg: &SweepConfig) -> Result<Vec<SweepRow>> {
    if cfg.pop_sizes.is_empty() || cfg.gen_counts.is_empty() || cfg.repeats == 0 {
        return Err(Error::InvalidConfig("sweep grid or repeats empty".into()));
    }
    let subjects = sorted_subjects(features);
    if subjects.len() < 2 * GROUP_SIZE + 1 {
        return Err(Error::Data(format!(
            "sweep needs at least {} subjects, got {}",
            2 * GROUP_SIZE + 1,
            subjects.len()
        )));
    }
    let n_features = features.n_cols();

    // Per-repeat splits and contexts are shared across grid cells; the
    // fitness memo inside each context also carries across cells.
    let mut panels = Vec::with_capacity(cfg.repeats);
    for r in 0..cfg.repeats {
        let mut rng = seeds::stream_rng(cfg.seed, &[TAG_SWEEP_SPLIT, r as u64]);
        let sizes = (subjects.len() - 2 * GROUP_SIZE, GROUP_SIZE, GROUP_SIZE);
        let split = split_subjects(&subjects, &mut rng, sizes)?;

        let mut evo_cfg = FitnessConfig::new(cfg.seed);
        evo_cfg.objective_mode = cfg.objective_mode;
        evo_cfg.surrogate = cfg.surrogate;
        evo_cfg.fitness_trees = cfg.fitness_trees;
        let evolution =
            FitnessContext::new(features, &split.train_subjects, &split.validation_subjects, evo_cfg)?;

        let mut report_ids = split.train_subjects.clone();
        report_ids.extend(&split.validation_subjects);
        report_ids.sort_unstable();
        let mut rep_cfg = FitnessConfig::new(cfg.seed);
        rep_cfg.fitness_trees = REPORT_TREES;
        let reporting = FitnessContext::new(features, &report_ids, &split.test_subjects, rep_cfg)?;
        panels.push((evolution, reporting));
    }

    let mut rows = Vec::new();
    for &pop in &cfg.pop_sizes {
        for &gens in &cfg.gen_counts {
            let mut rec_mean = 0.0;
            let mut id_mean = 0.0;
            for (r, (evolution, reporting)) in panels.iter().enumerate() {
                let ga_seed = u64::from_le_bytes(
                    seeds::derive_seed(
                        cfg.seed,
                        &[TAG_SWEEP_GA, pop as u64, gens as u64, r as u64],
                    )[..8]
                        .try_into()
                        .unwrap(),
                );
                let mut ga = GaConfig::new(n_features, pop, gens, ga_seed);
                ga.objective_mode = cfg.objective_mode;
                let archive = evolve(&ga, |mask| evolution.objectives(mask))?;
                let chosen = pick_solution(&archive)
                    .ok_or_else(|| Error::Data("empty archive from sweep cell".into()))?;
                let [o1, o2, _] = reporting.evaluate(&chosen.mask)?;
                rec_mean += o1 / cfg.repeats as f64;
                id_mean += (1.0 - o2) / cfg.repeats as f64;
            }
            rows.push(SweepRow {
                population_size: pop,
                generations: gens,
                recognition_accuracy: rec_mean,
                identification_accuracy: id_mean,
            });
        }
    }
    Ok(rows)
}

/// CSV for sweep results, one row per grid cell.
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(
        "population_size,generations,recognition_accuracy,identification_accuracy\n",
    );
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{}\n",
            r.population_size, r.generations, r.recognition_accuracy, r.identification_accuracy
        ));
    }
    out
}

/// One line of the method-comparison table (all features vs. RFE-CV vs.
/// multi-objective selection).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub method: String,
    pub n_features: usize,
    pub recognition_accuracy: f64,
    pub identification_accuracy: f64,
}

/// CSV for the method comparison, one row per method.
pub fn comparison_csv(rows: &[ComparisonRow]) -> String {
    let mut out =
        String::from("method,n_features,recognition_accuracy,identification_accuracy\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{}\n",
            r.method, r.n_features, r.recognition_accuracy, r.identification_accuracy
        ));
    }
    out
}
