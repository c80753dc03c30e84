//! End-to-end command tests on a miniature configuration.

use std::path::PathBuf;
use std::process::Command;

use ela_predict::table::Csv;
use ela_predict_cli::config::{ConfigFile, Profile, RunConfig};
use ela_predict_cli::{cmd_evaluate, cmd_explain, cmd_features, cmd_ingest, cmd_simulate};

fn tiny_config(out_dir: PathBuf) -> RunConfig {
    let file: ConfigFile = serde_json::from_str(
        r#"{
            "instances_per_problem": 3,
            "fold_count": 3,
            "repetitions": 1,
            "maximin_sweeps": 50,
            "budget": 200,
            "runs_per_cell": 2,
            "str_params": {"n_estimators": 4, "max_depth": 6},
            "mtr_params": {"n_estimators": 8, "max_depth": 6},
            "tsne_iterations": 300,
            "local_instance": 2
        }"#,
    )
    .unwrap();
    RunConfig::resolve(&file, Some(Profile::Desk), Some(7), Some(out_dir)).unwrap()
}

fn temp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("ela-predict-test-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    dir
}

#[test]
fn full_pipeline_on_tiny_config() {
    let out = temp_dir("pipeline");
    let cfg = tiny_config(out.clone());

    cmd_features(&cfg).unwrap();
    cmd_simulate(&cfg).unwrap();
    cmd_ingest(&cfg).unwrap();
    cmd_evaluate(&cfg).unwrap();
    cmd_explain(&cfg).unwrap();

    for name in [
        "features.csv",
        "catalog.json",
        "instances.json",
        "performance_runs.csv",
        "performance_meta.json",
        "algorithms.json",
        "performance_table.csv",
        "predictions_str.csv",
        "predictions_mtr.csv",
        "mae_report.csv",
        "mae_report.json",
        "dataset_info.json",
        "importance_str.csv",
        "importance_mtr.csv",
        "top_features_str.json",
        "venn_str.json",
        "representation_str.csv",
        "tsne_str.csv",
        "beeswarm_str.csv",
        "local_str.csv",
        "local_str.json",
    ] {
        assert!(out.join(name).exists(), "missing artifact {name}");
    }

    let features = Csv::parse(&std::fs::read_to_string(out.join("features.csv")).unwrap()).unwrap();
    assert_eq!(features.rows.len(), 24 * 3);

    let report = Csv::parse(&std::fs::read_to_string(out.join("mae_report.csv")).unwrap()).unwrap();
    assert_eq!(report.rows.len(), 25);
    assert_eq!(report.header.len(), 7);

    let _ = std::fs::remove_dir_all(&out);
}

#[test]
fn reruns_are_byte_identical() {
    let out_a = temp_dir("rerun-a");
    let out_b = temp_dir("rerun-b");
    for out in [&out_a, &out_b] {
        let cfg = tiny_config(out.clone());
        cmd_features(&cfg).unwrap();
        cmd_simulate(&cfg).unwrap();
    }
    for name in ["features.csv", "performance_runs.csv", "instances.json"] {
        let a = std::fs::read(out_a.join(name)).unwrap();
        let b = std::fs::read(out_b.join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between reruns");
    }
    let _ = std::fs::remove_dir_all(&out_a);
    let _ = std::fs::remove_dir_all(&out_b);
}

#[test]
fn str_only_mode_omits_mtr_columns() {
    let out = temp_dir("str-only");
    let mut cfg = tiny_config(out.clone());
    cfg.modes = vec![ela_predict::pipeline::Mode::Str];
    cmd_features(&cfg).unwrap();
    cmd_simulate(&cfg).unwrap();
    cmd_evaluate(&cfg).unwrap();
    let report = Csv::parse(&std::fs::read_to_string(out.join("mae_report.csv")).unwrap()).unwrap();
    assert_eq!(report.header.len(), 1 + 3);
    assert!(report.header.iter().all(|h| !h.ends_with("_MTR")));
    assert!(!out.join("predictions_mtr.csv").exists());
    let _ = std::fs::remove_dir_all(&out);
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_ela-predict");

    // Validation failure: fold_count must equal instances_per_problem.
    let dir = temp_dir("exit-codes");
    std::fs::create_dir_all(&dir).unwrap();
    let bad_config = dir.join("bad.json");
    std::fs::write(&bad_config, r#"{"fold_count": 7}"#).unwrap();
    let status = Command::new(bin)
        .args(["features", "--config"])
        .arg(&bad_config)
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(2));

    // Unknown config key is a validation failure too.
    std::fs::write(&bad_config, r#"{"no_such_key": 1}"#).unwrap();
    let status = Command::new(bin)
        .args(["features", "--config"])
        .arg(&bad_config)
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(2));

    // Evaluate without inputs: missing files are a validation error.
    let status = Command::new(bin)
        .args(["evaluate", "--out-dir"])
        .arg(dir.join("nowhere"))
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(2));

    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn unknown_local_instance_is_rejected() {
    let out = temp_dir("local-oob");
    let file: ConfigFile = serde_json::from_str(r#"{"local_instance": 99}"#).unwrap();
    let err = RunConfig::resolve(&file, Some(Profile::Desk), None, Some(out)).unwrap_err();
    assert!(err.is_user_error());
}
