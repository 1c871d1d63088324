use std::fs;
use std::process::{Command, Output};

use serde_json::Value;

fn mvtc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mvtc")).args(args).output().unwrap()
}

fn error_record(out: &Output) -> Value {
    let line = String::from_utf8_lossy(&out.stderr);
    serde_json::from_str(line.trim()).unwrap_or_else(|e| panic!("stderr is not a record ({e}): {line}"))
}

#[test]
fn gen_then_run_writes_a_full_report() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    let gen = mvtc(&[
        "gen-synthetic",
        "--clusters", "3",
        "--n-samples", "90",
        "--dims", "5,6",
        "--out-dir", data.to_str().unwrap(),
        "--format", "binary",
    ]);
    assert!(gen.status.success(), "{}", String::from_utf8_lossy(&gen.stderr));
    let manifest = data.join("manifest.json");
    assert!(manifest.exists());

    let report_path = dir.path().join("report.json");
    let run = mvtc(&["run", "--manifest", manifest.to_str().unwrap(), "--anchors", "30", "--out", report_path.to_str().unwrap()]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let report: Value = serde_json::from_str(&fs::read_to_string(&report_path).unwrap()).unwrap();
    assert_eq!(report["n_samples"], 90);
    assert_eq!(report["n_views"], 2);
    assert_eq!(report["config"]["anchors"], 30);
    assert_eq!(report["config"]["clusters"], 3);
    assert_eq!(report["objective_trace"].as_array().unwrap().len(), 7);
    for key in ["acc", "nmi", "purity", "f_score", "precision", "recall", "ari"] {
        assert!(report["metrics"][key].is_number(), "{key}");
    }
    for key in ["graph_build_s", "solve_s", "kmeans_s", "total_s"] {
        assert!(report["timings"][key].is_number(), "{key}");
    }
    assert!(report["versions"]["mvtc_core"].is_string());
}

#[test]
fn ablation_flags_are_echoed() {
    let out = mvtc(&["run", "--synthetic", "--clusters", "3", "--n-samples", "60", "--anchors", "20", "--no-isc", "--no-igs"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["config"]["beta"], 0.0);
    assert_eq!(report["config"]["smoothing"], "identity");
    assert_eq!(report["config"]["no_isc"], true);
}

#[test]
fn thread_count_does_not_change_results() {
    let base = ["run", "--synthetic", "--clusters", "3", "--n-samples", "80", "--anchors", "25"];
    let strip = |out: Output| {
        assert!(out.status.success());
        let mut v: Value = serde_json::from_slice(&out.stdout).unwrap();
        v.as_object_mut().unwrap().remove("timings");
        v
    };
    let one = strip(mvtc(&[&["--threads", "1"], &base[..]].concat()));
    let four = strip(mvtc(&[&["--threads", "4"], &base[..]].concat()));
    assert_eq!(one, four);
}

#[test]
fn metrics_subcommand() {
    let dir = tempfile::tempdir().unwrap();
    let pred = dir.path().join("pred.txt");
    let truth = dir.path().join("truth.txt");
    fs::write(&pred, "0\n1\n0\n1\n").unwrap();
    fs::write(&truth, "0\n0\n1\n1\n").unwrap();
    let out = mvtc(&["metrics", "--pred", pred.to_str().unwrap(), "--truth", truth.to_str().unwrap()]);
    assert!(out.status.success());
    let scores: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(scores["ari"], -0.5);
    assert_eq!(scores["acc"], 0.5);
}

#[test]
fn failures_exit_with_a_json_record() {
    let missing = mvtc(&["run", "--manifest", "/nonexistent/manifest.json"]);
    assert_eq!(missing.status.code(), Some(2));
    assert_eq!(error_record(&missing)["error"], "MissingFile");

    let bad_band = mvtc(&["run", "--synthetic", "--clusters", "3", "--n-samples", "20", "--anchors", "5", "--lowfreq", "50"]);
    assert_eq!(bad_band.status.code(), Some(2));
    assert_eq!(error_record(&bad_band)["error"], "ValidationError");

    let usage = mvtc(&["frobnicate"]);
    assert_eq!(usage.status.code(), Some(2));
    assert_eq!(error_record(&usage)["error"], "UsageError");

    let dir = tempfile::tempdir().unwrap();
    let pred = dir.path().join("p.txt");
    fs::write(&pred, "0\n1\n").unwrap();
    let truth = dir.path().join("t.txt");
    fs::write(&truth, "0\n").unwrap();
    let mismatch = mvtc(&["metrics", "--pred", pred.to_str().unwrap(), "--truth", truth.to_str().unwrap()]);
    assert_eq!(mismatch.status.code(), Some(2));
    assert_eq!(error_record(&mismatch)["error"], "DimensionMismatch");

    assert!(mvtc(&["--help"]).status.success());
}
