//! End-to-end IO tests: config precedence, CSV round trips through real
//! files, artifact determinism, and binary exit codes.

use std::process::Command;

use qbdrive_cli::config::{ExperimentConfig, PerturbationChoice};
use qbdrive_cli::csvio;
use qbdrive_cli::experiment;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_qbdrive"))
}

fn short_config() -> ExperimentConfig {
    ExperimentConfig {
        t_max: 2.0,
        dt: 0.01,
        perturbation: PerturbationChoice::L4,
        ..ExperimentConfig::default()
    }
}

#[test]
fn emitted_csv_round_trips_through_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = short_config();
    cfg.out_csv = Some(dir.path().join("out.csv"));
    let run = experiment::run_experiment(&cfg).unwrap();
    let text = std::fs::read_to_string(dir.path().join("out.csv")).unwrap();
    let parsed = csvio::parse_csv(&text).unwrap();
    assert_eq!(parsed.rows.len(), run.rows.len());
    for (a, b) in parsed.rows.iter().zip(run.rows.iter()) {
        assert_eq!(a, b, "exact float round trip");
    }
    // header echo reproduces the run parameters
    assert_eq!(parsed.config.t_max, cfg.t_max);
    assert_eq!(parsed.config.dt, cfg.dt);
    assert_eq!(parsed.config.perturbation, cfg.perturbation);
    assert_eq!(parsed.config.omega, cfg.omega);
}

#[test]
fn run_command_writes_artifacts_and_respects_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("exp.cfg");
    std::fs::write(&cfg_path, "t_max=1.0\ndt=0.01\nperturbation=s3\n").unwrap();
    let csv = dir.path().join("a.csv");
    let svg = dir.path().join("a.svg");
    let status = bin()
        .args(["run", "--config"])
        .arg(&cfg_path)
        .args(["--perturbation", "l8", "--out-csv"])
        .arg(&csv)
        .arg("--out-svg")
        .arg(&svg)
        .status()
        .unwrap();
    assert!(status.success());
    let text = std::fs::read_to_string(&csv).unwrap();
    // CLI flag overrides the config file
    assert!(text.starts_with("# "), "header line");
    assert!(text.contains("perturbation=l8"));
    let svg_text = std::fs::read_to_string(&svg).unwrap();
    assert!(svg_text.starts_with("<?xml"));
    assert!(svg_text.contains("</svg>"));
}

#[test]
fn sweep_emits_deterministic_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("exp.cfg");
    std::fs::write(&cfg_path, "t_max=1.0\ndt=0.02\n").unwrap();
    for sub in ["one", "two"] {
        let status = bin()
            .args(["sweep", "--perturbations", "all", "--config"])
            .arg(&cfg_path)
            .arg("--out-dir")
            .arg(dir.path().join(sub))
            .status()
            .unwrap();
        assert!(status.success());
    }
    for label in ["s3", "l4", "l5", "l8"] {
        for ext in ["csv", "svg"] {
            let name = format!("run_{label}.{ext}");
            let a = std::fs::read(dir.path().join("one").join(&name)).unwrap();
            let b = std::fs::read(dir.path().join("two").join(&name)).unwrap();
            assert!(!a.is_empty());
            assert_eq!(a, b, "{name} differs between sweeps");
        }
    }
}

#[test]
fn exit_codes() {
    // validation error: bad flag value
    let status = bin().args(["run", "--dt", "-0.5", "--t-max", "1"]).status().unwrap();
    assert_eq!(status.code(), Some(1));

    // validation error: unknown suite
    let status = bin().args(["verify", "bogus"]).status().unwrap();
    assert_eq!(status.code(), Some(1));

    // validation error: unknown perturbation
    let status = bin().args(["run", "--perturbation", "x9"]).status().unwrap();
    assert_eq!(status.code(), Some(1));

    // validation error: unsupported sweep selection
    let status = bin().args(["sweep", "--perturbations", "some"]).status().unwrap();
    assert_eq!(status.code(), Some(1));

    // success: a cheap verification suite
    let status = bin().args(["verify", "algebra"]).status().unwrap();
    assert_eq!(status.code(), Some(0));
}

#[test]
fn config_file_errors_are_validation_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("bad.cfg");
    std::fs::write(&cfg_path, "not a pair\n").unwrap();
    let status = bin().args(["run", "--config"]).arg(&cfg_path).status().unwrap();
    assert_eq!(status.code(), Some(1));

    std::fs::write(&cfg_path, "mystery=1\n").unwrap();
    let status = bin().args(["run", "--config"]).arg(&cfg_path).status().unwrap();
    assert_eq!(status.code(), Some(1));
}
