//! Command-line orchestration: synthesize data, extract features, select,
//! run baselines, evaluate, sweep, and compare.
//!
//! Every command is deterministic given its config; seeds are mandatory.
//! Outputs are plain CSV/JSON/JSON-lines. Relative output paths resolve
//! under `VITALSEL_OUT_DIR` when that variable is set. Exit codes: 0
//! success, 1 usage/config error (including argument parse failures), 2
//! data error.

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::baselines::{rfe, rfe_cv};
use crate::error::{Error, Result};
use crate::evalproto::{
    comparison_csv, pick_solution, run_logo, run_loso, run_split, split_subjects, sweep_csv,
    sweep_ga, ComparisonRow, SplitSpec, SweepConfig, GROUP_SIZE,
};
use crate::features::{extract_from_records, CatalogConfig, FeatureMatrix};
use crate::fitness::{activity_class, FitnessConfig, FitnessContext};
use crate::nsga2::{evolve_logged, FeatureMask, GaConfig, ObjectiveMode};
use crate::preprocess::{apply_scaler, fit_scaler, impute};
use crate::seeds;
use crate::sigsynth::{
    read_dataset, synthesize_dataset, write_dataset, Activity, Position, DEFAULT_DURATION_S,
    DEFAULT_SAMPLE_RATE_HZ,
};

const TAG_CLI_SPLIT: u64 = 0x636c6973; // subject split shared by select/rfe/evaluate-split

/// Environment variable that re-roots relative output paths.
pub const OUT_DIR_ENV: &str = "VITALSEL_OUT_DIR";

#[derive(Parser)]
#[command(
    name = "vitalsel",
    version,
    about = "Multi-objective feature selection for vital-sign activity recognition"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ObjectiveModeArg {
    SuppressIdentity,
    SuppressActivity,
}

impl From<ObjectiveModeArg> for ObjectiveMode {
    fn from(v: ObjectiveModeArg) -> Self {
        match v {
            ObjectiveModeArg::SuppressIdentity => ObjectiveMode::SuppressIdentity,
            ObjectiveModeArg::SuppressActivity => ObjectiveMode::SuppressActivity,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ProtocolArg {
    Logo,
    Loso,
    Split,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic vital-sign dataset (session CSVs + manifest).
    Synth {
        /// JSON config: {"seed": .., "n_subjects": .., "duration": .., "fs": ..}
        #[arg(long)]
        config: PathBuf,
        /// Output dataset directory.
        #[arg(long, default_value = "dataset")]
        out: PathBuf,
    },
    /// Extract the windowed feature catalog from a dataset directory.
    Extract {
        #[arg(long)]
        dataset: PathBuf,
        /// Output feature CSV (189 feature columns + 3 label columns).
        #[arg(long, default_value = "features.csv")]
        out: PathBuf,
    },
    /// Evolve a Pareto archive of feature masks with NSGA-II.
    Select {
        #[arg(long)]
        features: PathBuf,
        /// JSON config; flags below override its fields.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        pop_size: Option<usize>,
        #[arg(long)]
        generations: Option<usize>,
        /// Use the PCA + k-NN surrogate fitness.
        #[arg(long)]
        surrogate: bool,
        #[arg(long, value_enum)]
        objective_mode: Option<ObjectiveModeArg>,
        /// Append per-generation JSON-lines telemetry (includes wall times).
        #[arg(long)]
        telemetry: Option<PathBuf>,
        #[arg(long, default_value = "archive.json")]
        out: PathBuf,
    },
    /// Recursive feature elimination baseline (fixed size or CV-selected).
    Rfe {
        #[arg(long)]
        features: PathBuf,
        /// Target subset size (ignored with --cv).
        #[arg(long)]
        n_target: Option<usize>,
        /// Features dropped per iteration.
        #[arg(long, default_value_t = 1)]
        step: usize,
        /// Choose the subset size by stratified cross-validation.
        #[arg(long)]
        cv: bool,
        #[arg(long, default_value_t = 5)]
        folds: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value = "mask.json")]
        out: PathBuf,
    },
    /// Evaluate a mask (or the full catalog) under a protocol.
    Evaluate {
        #[arg(long)]
        features: PathBuf,
        /// Mask JSON ({"features": [..]}) or an archive JSON (its picked
        /// solution is used). Omit to evaluate the full catalog.
        #[arg(long)]
        mask: Option<PathBuf>,
        #[arg(long, value_enum)]
        protocol: ProtocolArg,
        /// LOGO repeats (ignored by loso/split).
        #[arg(long, default_value_t = 20)]
        repeats: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value = "reports")]
        out_dir: PathBuf,
        /// File stem for the report and confusion CSVs.
        #[arg(long, default_value = "report")]
        stem: String,
    },
    /// LOGO comparison of all-features vs. RFE vs. multi-objective masks.
    Compare {
        #[arg(long)]
        features: PathBuf,
        /// Archive JSON from `select`.
        #[arg(long)]
        archive: PathBuf,
        /// Mask JSON from `rfe`.
        #[arg(long)]
        rfe_mask: PathBuf,
        #[arg(long, default_value_t = 20)]
        repeats: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value = "comparison.csv")]
        out: PathBuf,
    },
    /// Grid sweep over population sizes and generation counts.
    Sweep {
        #[arg(long)]
        features: PathBuf,
        /// JSON config: pop_sizes, gen_counts, repeats, seed, ...
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "sweep.csv")]
        out: PathBuf,
    },
}

/// Parse argv and run; returns the process exit code.
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Synth { config, out } => cmd_synth(&config, &resolve_out(&out)),
        Command::Extract { dataset, out } => cmd_extract(&dataset, &resolve_out(&out)),
        Command::Select {
            features,
            config,
            seed,
            pop_size,
            generations,
            surrogate,
            objective_mode,
            telemetry,
            out,
        } => {
            let mut cfg = match config {
                Some(path) => parse_config::<SelectConfig>(&path)?,
                None => SelectConfig::from_seed(seed.ok_or_else(|| {
                    Error::InvalidConfig("--seed is required without --config".into())
                })?)?,
            };
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(p) = pop_size {
                cfg.population_size = p;
            }
            if let Some(g) = generations {
                cfg.max_generations = g;
            }
            if surrogate {
                cfg.surrogate = true;
            }
            if let Some(m) = objective_mode {
                cfg.objective_mode = m.into();
            }
            if let Some(t) = telemetry {
                cfg.telemetry = Some(t);
            }
            cmd_select(&features, &cfg, &resolve_out(&out))
        }
        Command::Rfe {
            features,
            n_target,
            step,
            cv,
            folds,
            seed,
            out,
        } => cmd_rfe(&features, n_target, step, cv, folds, seed, &resolve_out(&out)),
        Command::Evaluate {
            features,
            mask,
            protocol,
            repeats,
            seed,
            out_dir,
            stem,
        } => cmd_evaluate(
            &features,
            mask.as_deref(),
            protocol,
            repeats,
            seed,
            &resolve_out(&out_dir),
            &stem,
        ),
        Command::Compare {
            features,
            archive,
            rfe_mask,
            repeats,
            seed,
            out,
        } => cmd_compare(&features, &archive, &rfe_mask, repeats, seed, &resolve_out(&out)),
        Command::Sweep {
            features,
            config,
            out,
        } => {
            let cfg = parse_config::<SweepConfig>(&config)?;
            let matrix = FeatureMatrix::from_csv(&features)?;
            let rows = sweep_ga(&matrix, &cfg)?;
            let out = resolve_out(&out);
            write_text(&out, &sweep_csv(&rows))?;
            eprintln!("wrote {}", out.display());
            Ok(())
        }
    }
}

/// Re-root relative output paths under [`OUT_DIR_ENV`] when it is set.
fn resolve_out(path: &Path) -> PathBuf {
    if path.is_absolute() {
        return path.to_path_buf();
    }
    match std::env::var_os(OUT_DIR_ENV) {
        Some(root) if !root.is_empty() => Path::new(&root).join(path),
        _ => path.to_path_buf(),
    }
}

fn parse_config<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::InvalidConfig(format!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| Error::InvalidConfig(format!("bad config {}: {e}", path.display())))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    fs::write(path, text)?;
    Ok(())
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SynthConfig {
    seed: u64,
    #[serde(default = "default_subjects")]
    n_subjects: usize,
    #[serde(default = "default_duration")]
    duration: f64,
    #[serde(default = "default_fs")]
    fs: f64,
}

fn default_subjects() -> usize {
    50
}

fn default_duration() -> f64 {
    DEFAULT_DURATION_S
}

fn default_fs() -> f64 {
    DEFAULT_SAMPLE_RATE_HZ
}

fn cmd_synth(config_path: &Path, out: &Path) -> Result<()> {
    let cfg = parse_config::<SynthConfig>(config_path)?;
    let records = synthesize_dataset(
        cfg.seed,
        cfg.n_subjects,
        &Activity::ALL,
        &Position::ALL,
        cfg.duration,
        cfg.fs,
    )?;
    write_dataset(out, &records, cfg.seed)?;
    eprintln!("wrote {} sessions to {}", records.len(), out.display());
    Ok(())
}

fn cmd_extract(dataset: &Path, out: &Path) -> Result<()> {
    let records = read_dataset(dataset)?;
    let matrix = extract_from_records(&records, &CatalogConfig::default())?;
    if let Some(parent) = out.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    matrix.to_csv(out)?;
    eprintln!(
        "wrote {} rows x {} features to {}",
        matrix.n_rows(),
        matrix.n_cols(),
        out.display()
    );
    Ok(())
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SelectConfig {
    seed: u64,
    #[serde(default = "default_pop")]
    population_size: usize,
    #[serde(default = "default_gens")]
    max_generations: usize,
    #[serde(default = "default_crossover")]
    crossover_rate: f64,
    #[serde(default)]
    mutation_rate: Option<f64>,
    #[serde(default)]
    objective_mode: ObjectiveMode,
    #[serde(default)]
    normalized_crowding: bool,
    #[serde(default)]
    surrogate: bool,
    #[serde(default = "default_trees")]
    fitness_trees: usize,
    #[serde(default = "default_pca")]
    pca_dims: usize,
    #[serde(default)]
    telemetry: Option<PathBuf>,
}

fn default_pop() -> usize {
    50
}

fn default_gens() -> usize {
    30
}

fn default_crossover() -> f64 {
    0.9
}

fn default_trees() -> usize {
    50
}

fn default_pca() -> usize {
    5
}

impl SelectConfig {
    fn from_seed(seed: u64) -> Result<Self> {
        Ok(SelectConfig {
            seed,
            population_size: default_pop(),
            max_generations: default_gens(),
            crossover_rate: default_crossover(),
            mutation_rate: None,
            objective_mode: ObjectiveMode::default(),
            normalized_crowding: false,
            surrogate: false,
            fitness_trees: default_trees(),
            pca_dims: default_pca(),
            telemetry: None,
        })
    }
}

/// Archive JSON layout: the full Pareto set plus the picked solution.
#[derive(Debug, Serialize, Deserialize)]
pub struct ArchiveMember {
    pub features: Vec<String>,
    pub objectives: [f64; 3],
    pub n_features: usize,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ArchiveFile {
    pub config: serde_json::Value,
    pub split: SplitSpec,
    pub archive: Vec<ArchiveMember>,
    pub picked: ArchiveMember,
}

/// The subject split every CLI command derives from its seed, so `select`,
/// `rfe`, and `evaluate --protocol split` agree when given the same seed.
/// Public so non-CLI frontends can reproduce the same partition.
pub fn cli_split(features: &FeatureMatrix, seed: u64) -> Result<SplitSpec> {
    let mut ids: Vec<u32> = features
        .meta
        .iter()
        .map(|m| m.subject_id)
        .collect::<HashSet<_>>()
        .into_iter()
        .collect();
    ids.sort_unstable();
    if ids.len() < 2 * GROUP_SIZE + 1 {
        return Err(Error::Data(format!(
            "need more than {} subjects for a {}/{}/{} split, got {}",
            2 * GROUP_SIZE,
            ids.len().saturating_sub(2 * GROUP_SIZE),
            GROUP_SIZE,
            GROUP_SIZE,
            ids.len()
        )));
    }
    let mut rng = seeds::stream_rng(seed, &[TAG_CLI_SPLIT]);
    split_subjects(
        &ids,
        &mut rng,
        (ids.len() - 2 * GROUP_SIZE, GROUP_SIZE, GROUP_SIZE),
    )
}

fn member_from(features: &FeatureMatrix, mask: &FeatureMask, objectives: [f64; 3]) -> ArchiveMember {
    ArchiveMember {
        features: mask
            .indices()
            .into_iter()
            .map(|i| features.names[i].clone())
            .collect(),
        objectives,
        n_features: mask.count_ones(),
    }
}

fn cmd_select(features_path: &Path, cfg: &SelectConfig, out: &Path) -> Result<()> {
    let features = FeatureMatrix::from_csv(features_path)?;
    let split = cli_split(&features, cfg.seed)?;

    let mut fit_cfg = FitnessConfig::new(cfg.seed);
    fit_cfg.objective_mode = cfg.objective_mode;
    fit_cfg.surrogate = cfg.surrogate;
    fit_cfg.fitness_trees = cfg.fitness_trees;
    fit_cfg.pca_dims = cfg.pca_dims;
    let ctx = FitnessContext::new(
        &features,
        &split.train_subjects,
        &split.validation_subjects,
        fit_cfg,
    )?;

    let ga = GaConfig {
        n_features: features.n_cols(),
        population_size: cfg.population_size,
        max_generations: cfg.max_generations,
        crossover_rate: cfg.crossover_rate,
        mutation_rate: cfg.mutation_rate,
        seed: cfg.seed,
        objective_mode: cfg.objective_mode,
        normalized_crowding: cfg.normalized_crowding,
    };

    let archive = match &cfg.telemetry {
        Some(t) => {
            let t = resolve_out(t);
            if let Some(parent) = t.parent() {
                if !parent.as_os_str().is_empty() {
                    fs::create_dir_all(parent)?;
                }
            }
            let mut sink = fs::File::create(&t)?;
            evolve_logged(&ga, |m| ctx.objectives(m), Some(&mut sink))?
        }
        None => evolve_logged(&ga, |m| ctx.objectives(m), None)?,
    };

    let picked = pick_solution(&archive)
        .ok_or_else(|| Error::Data("evolution produced an empty archive".into()))?;
    let file = ArchiveFile {
        config: serde_json::json!({
            "seed": cfg.seed,
            "population_size": cfg.population_size,
            "max_generations": cfg.max_generations,
            "crossover_rate": cfg.crossover_rate,
            "mutation_rate": cfg.mutation_rate,
            "objective_mode": cfg.objective_mode,
            "normalized_crowding": cfg.normalized_crowding,
            "surrogate": cfg.surrogate,
            "fitness_trees": cfg.fitness_trees,
            "pca_dims": cfg.pca_dims,
            "unique_masks_evaluated": ctx.cached_evaluations(),
        }),
        split: split.clone(),
        archive: archive
            .members()
            .iter()
            .map(|ind| member_from(&features, &ind.mask, ind.objectives))
            .collect(),
        picked: member_from(&features, &picked.mask, picked.objectives),
    };
    write_text(out, &(serde_json::to_string_pretty(&file)? + "\n"))?;
    eprintln!(
        "archive of {} masks written to {}",
        file.archive.len(),
        out.display()
    );
    Ok(())
}

/// Mask JSON layout written by `rfe` and accepted by `evaluate`.
#[derive(Debug, Serialize, Deserialize)]
pub struct MaskFile {
    pub features: Vec<String>,
    pub n_features: usize,
}

/// Training rows for the baselines: train + validation subjects, imputed and
/// standardized, with activity labels.
/// Standardized training rows (train + validation subjects) with activity
/// labels, as used for the RFE baselines. Public for non-CLI frontends.
pub fn baseline_training(
    features: &FeatureMatrix,
    split: &SplitSpec,
) -> Result<(FeatureMatrix, Vec<u16>)> {
    let mut ids = split.train_subjects.clone();
    ids.extend(&split.validation_subjects);
    let mut train = features.filter_rows(|m| ids.contains(&m.subject_id));
    impute(&mut train);
    let scaler = fit_scaler(&train)?;
    apply_scaler(&scaler, &mut train)?;
    let y = train.meta.iter().map(|m| activity_class(m.activity)).collect();
    Ok((train, y))
}

fn cmd_rfe(
    features_path: &Path,
    n_target: Option<usize>,
    step: usize,
    cv: bool,
    folds: usize,
    seed: u64,
    out: &Path,
) -> Result<()> {
    let features = FeatureMatrix::from_csv(features_path)?;
    let split = cli_split(&features, seed)?;
    let (train, y) = baseline_training(&features, &split)?;

    let mask = if cv {
        rfe_cv(&train.data, train.n_cols(), &y, folds, seed)?
    } else {
        let target = n_target.ok_or_else(|| {
            Error::InvalidConfig("--n-target is required without --cv".into())
        })?;
        rfe(&train.data, train.n_cols(), &y, target, step, seed)?
    };
    let file = MaskFile {
        features: mask
            .indices()
            .into_iter()
            .map(|i| features.names[i].clone())
            .collect(),
        n_features: mask.count_ones(),
    };
    write_text(out, &(serde_json::to_string_pretty(&file)? + "\n"))?;
    eprintln!("mask of {} features written to {}", file.n_features, out.display());
    Ok(())
}

/// Translate feature names into a catalog mask; unknown names are an error.
pub fn mask_from_names(names: &[String], catalog: &[String]) -> Result<FeatureMask> {
    let index: std::collections::HashMap<&str, usize> = catalog
        .iter()
        .enumerate()
        .map(|(i, n)| (n.as_str(), i))
        .collect();
    let mut bits = vec![false; catalog.len()];
    let mut unknown = Vec::new();
    for name in names {
        match index.get(name.as_str()) {
            Some(&i) => bits[i] = true,
            None => unknown.push(name.clone()),
        }
    }
    if !unknown.is_empty() {
        return Err(Error::Data(format!(
            "mask names not in the feature catalog: {}",
            unknown.join(", ")
        )));
    }
    Ok(FeatureMask::new(bits))
}

/// Load a mask from either a `MaskFile` or an `ArchiveFile` (picked member).
fn load_mask(path: &Path, catalog: &[String]) -> Result<FeatureMask> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Data(format!("cannot read mask {}: {e}", path.display())))?;
    let value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| Error::Data(format!("bad mask JSON {}: {e}", path.display())))?;
    let names: Vec<String> = if value.get("features").is_some() {
        serde_json::from_value::<MaskFile>(value)
            .map_err(|e| Error::Data(format!("bad mask file {}: {e}", path.display())))?
            .features
    } else if value.get("picked").is_some() {
        serde_json::from_value::<ArchiveFile>(value)
            .map_err(|e| Error::Data(format!("bad archive file {}: {e}", path.display())))?
            .picked
            .features
    } else {
        return Err(Error::Data(format!(
            "{} is neither a mask file nor an archive file",
            path.display()
        )));
    };
    mask_from_names(&names, catalog)
}

fn cmd_evaluate(
    features_path: &Path,
    mask_path: Option<&Path>,
    protocol: ProtocolArg,
    repeats: usize,
    seed: u64,
    out_dir: &Path,
    stem: &str,
) -> Result<()> {
    let features = FeatureMatrix::from_csv(features_path)?;
    let mask = mask_path
        .map(|p| load_mask(p, &features.names))
        .transpose()?;
    let report = match protocol {
        ProtocolArg::Logo => run_logo(&features, mask.as_ref(), repeats, seed)?,
        ProtocolArg::Loso => run_loso(&features, mask.as_ref(), seed)?,
        ProtocolArg::Split => {
            let split = cli_split(&features, seed)?;
            run_split(&features, mask.as_ref(), &split, seed)?
        }
    };
    report.write(out_dir, stem)?;
    match report.identification_accuracy {
        Some(id) => eprintln!(
            "recognition {:.4} identification {:.4} -> {}",
            report.recognition_accuracy,
            id,
            out_dir.join(format!("{stem}.json")).display()
        ),
        None => eprintln!(
            "recognition {:.4} -> {}",
            report.recognition_accuracy,
            out_dir.join(format!("{stem}.json")).display()
        ),
    }
    Ok(())
}

fn cmd_compare(
    features_path: &Path,
    archive_path: &Path,
    rfe_mask_path: &Path,
    repeats: usize,
    seed: u64,
    out: &Path,
) -> Result<()> {
    let features = FeatureMatrix::from_csv(features_path)?;
    let ga_mask = load_mask(archive_path, &features.names)?;
    let rfe_mask = load_mask(rfe_mask_path, &features.names)?;

    let mut rows = Vec::new();
    for (method, mask) in [
        ("all_features", None),
        ("rfe", Some(&rfe_mask)),
        ("multi_objective", Some(&ga_mask)),
    ] {
        let report = run_logo(&features, mask, repeats, seed)?;
        rows.push(ComparisonRow {
            method: method.to_string(),
            n_features: report.n_features_used,
            recognition_accuracy: report.recognition_accuracy,
            identification_accuracy: report.identification_accuracy.unwrap_or(f64::NAN),
        });
    }
    write_text(out, &comparison_csv(&rows))?;
    eprintln!("wrote {}", out.display());
    Ok(())
}
