//! CLI contract tests: exit codes, error channels, output re-rooting, and
//! the telemetry stream. Pipeline determinism is covered by the acceptance
//! suite; these tests pin the command-line surface itself.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::OnceLock;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_vitalsel")
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    Command::new(bin()).args(args).current_dir(dir).output().unwrap()
}

fn stderr_of(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

/// Nine-subject features CSV shared by the tests: the smallest population
/// the (n-8)/4/4 split accepts. Built once; the tempdir lives for the whole
/// test process.
fn features_csv() -> &'static Path {
    static SHARED: OnceLock<(tempfile::TempDir, PathBuf)> = OnceLock::new();
    let (_, path) = SHARED.get_or_init(|| {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("synth.json"), r#"{"seed": 3, "n_subjects": 9}"#).unwrap();
        let synth = run_in(dir.path(), &["synth", "--config", "synth.json", "--out", "data"]);
        assert!(synth.status.success(), "{}", stderr_of(&synth));
        let extract = run_in(dir.path(), &["extract", "--dataset", "data", "--out", "features.csv"]);
        assert!(extract.status.success(), "{}", stderr_of(&extract));
        let path = dir.path().join("features.csv");
        (dir, path)
    });
    path
}

fn features_arg() -> &'static str {
    features_csv().to_str().unwrap()
}

#[test]
fn help_and_version_exit_zero() {
    for args in [&["--help"][..], &["--version"][..], &["select", "--help"][..]] {
        let out = Command::new(bin()).args(args).output().unwrap();
        assert_eq!(out.status.code(), Some(0), "{args:?}");
    }
}

#[test]
fn usage_errors_exit_one() {
    // Unknown flag: rejected by the parser.
    let out = Command::new(bin()).args(["select", "--bogus-flag"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));

    // Unknown subcommand.
    let out = Command::new(bin()).args(["transmogrify"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn missing_seed_in_config_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("synth.json"), r#"{"n_subjects": 4}"#).unwrap();
    let out = run_in(dir.path(), &["synth", "--config", "synth.json", "--out", "data"]);
    assert_eq!(out.status.code(), Some(1), "{}", stderr_of(&out));
    assert!(stderr_of(&out).contains("seed"));

    // select without any seed source at all.
    let out = run_in(dir.path(), &["select", "--features", features_arg()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr_of(&out).contains("seed"));
}

#[test]
fn data_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(
        dir.path(),
        &["select", "--features", "no_such.csv", "--seed", "1"],
    );
    assert_eq!(out.status.code(), Some(2), "{}", stderr_of(&out));
}

#[test]
fn unknown_mask_names_exit_two_and_are_listed() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("mask.json"),
        r#"{"features": ["chest_mean", "bogus_alpha", "bogus_beta"], "n_features": 3}"#,
    )
    .unwrap();
    let out = run_in(
        dir.path(),
        &[
            "evaluate", "--features", features_arg(), "--mask", "mask.json",
            "--protocol", "split", "--seed", "4", "--out-dir", "reports",
        ],
    );
    assert_eq!(out.status.code(), Some(2), "{}", stderr_of(&out));
    let err = stderr_of(&out);
    assert!(err.contains("bogus_alpha") && err.contains("bogus_beta"), "{err}");
    assert!(!err.contains("chest_mean"), "known names must not be flagged: {err}");
}

#[test]
fn out_dir_env_reroots_relative_outputs_only() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(bin())
        .args([
            "select", "--features", features_arg(), "--seed", "6",
            "--pop-size", "6", "--generations", "1", "--out", "archive.json",
        ])
        .current_dir(dir.path())
        .env("VITALSEL_OUT_DIR", dir.path().join("routed"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", stderr_of(&out));
    assert!(dir.path().join("routed/archive.json").exists());
    assert!(!dir.path().join("archive.json").exists());

    // Absolute output paths are taken verbatim.
    let absolute = dir.path().join("explicit.json");
    let out = Command::new(bin())
        .args([
            "select", "--features", features_arg(), "--seed", "6",
            "--pop-size", "6", "--generations", "1", "--out", absolute.to_str().unwrap(),
        ])
        .current_dir(dir.path())
        .env("VITALSEL_OUT_DIR", dir.path().join("routed"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", stderr_of(&out));
    assert!(absolute.exists());
}

#[test]
fn select_flags_override_and_archive_is_consistent() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(
        dir.path(),
        &[
            "select", "--features", features_arg(), "--seed", "8",
            "--pop-size", "6", "--generations", "2", "--out", "archive.json",
        ],
    );
    assert_eq!(out.status.code(), Some(0), "{}", stderr_of(&out));
    let archive: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("archive.json")).unwrap())
            .unwrap();
    assert_eq!(archive["config"]["population_size"], 6);
    assert_eq!(archive["config"]["max_generations"], 2);
    assert_eq!(archive["config"]["seed"], 8);
    // The pick is one of the archive members.
    let members = archive["archive"].as_array().unwrap();
    assert!(!members.is_empty());
    assert!(members.iter().any(|m| m == &archive["picked"]));
    // Masks serialize as feature-name lists.
    assert!(archive["picked"]["features"].as_array().unwrap().len() > 0);
}

#[test]
fn evaluate_accepts_masks_from_both_file_shapes() {
    let dir = tempfile::tempdir().unwrap();
    let select = run_in(
        dir.path(),
        &[
            "select", "--features", features_arg(), "--seed", "9",
            "--pop-size", "6", "--generations", "1", "--out", "archive.json",
        ],
    );
    assert!(select.status.success(), "{}", stderr_of(&select));
    let rfe = run_in(
        dir.path(),
        &[
            "rfe", "--features", features_arg(), "--n-target", "8",
            "--step", "40", "--seed", "9", "--out", "mask.json",
        ],
    );
    assert!(rfe.status.success(), "{}", stderr_of(&rfe));

    for mask in ["archive.json", "mask.json"] {
        let out = run_in(
            dir.path(),
            &[
                "evaluate", "--features", features_arg(), "--mask", mask,
                "--protocol", "split", "--seed", "9",
                "--out-dir", "reports", "--stem", mask,
            ],
        );
        assert_eq!(out.status.code(), Some(0), "{mask}: {}", stderr_of(&out));
        let report: serde_json::Value = serde_json::from_str(
            &std::fs::read_to_string(dir.path().join(format!("reports/{mask}.json"))).unwrap(),
        )
        .unwrap();
        assert_eq!(report["protocol"], "split");
        assert!(report["recognition_accuracy"].as_f64().unwrap() > 0.0);
    }
}

#[test]
fn rfe_requires_a_target_without_cv() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(
        dir.path(),
        &["rfe", "--features", features_arg(), "--seed", "2", "--out", "mask.json"],
    );
    assert_eq!(out.status.code(), Some(1), "{}", stderr_of(&out));
    assert!(stderr_of(&out).contains("n-target"));
}

#[test]
fn telemetry_stream_is_json_lines_with_wall_times() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(
        dir.path(),
        &[
            "select", "--features", features_arg(), "--seed", "10",
            "--pop-size", "6", "--generations", "3",
            "--telemetry", "telemetry.jsonl", "--out", "archive.json",
        ],
    );
    assert_eq!(out.status.code(), Some(0), "{}", stderr_of(&out));
    let text = std::fs::read_to_string(dir.path().join("telemetry.jsonl")).unwrap();
    let lines: Vec<serde_json::Value> = text
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    // One line for initialization plus one per generation.
    assert_eq!(lines.len(), 4);
    for (g, line) in lines.iter().enumerate() {
        assert_eq!(line["generation"].as_u64().unwrap() as usize, g);
        assert!(line["wall_ms"].as_f64().unwrap() >= 0.0);
        assert!(line["archive_size"].as_u64().unwrap() >= 1);
    }
}

#[test]
fn loso_report_has_normalized_confusion() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(
        dir.path(),
        &[
            "evaluate", "--features", features_arg(), "--protocol", "loso",
            "--seed", "4", "--out-dir", "reports", "--stem", "loso",
        ],
    );
    assert_eq!(out.status.code(), Some(0), "{}", stderr_of(&out));
    assert!(dir.path().join("reports/loso.json").exists());
    assert!(dir.path().join("reports/loso_recognition_confusion.csv").exists());
    assert!(dir
        .path()
        .join("reports/loso_recognition_confusion_normalized.csv")
        .exists());
    let report: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("reports/loso.json")).unwrap(),
    )
    .unwrap();
    // LOSO cannot identify held-out subjects, so the field stays empty.
    assert!(report.get("identification_accuracy").is_none() || report["identification_accuracy"].is_null());
}
