//! End-to-end checks of the command-line surface: exit codes, output
//! files, and byte-level reproducibility across worker counts.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_auction-lab"))
}

fn fixture() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/tests/data/fixture.csv")
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn help_exits_zero() {
    let out = run(&["--help"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("auction-lab"));
    for sub in ["calibrate", "market-quality", "best-response", "optimize", "reproduce"] {
        assert!(stdout(&out).contains(sub), "missing {sub} in help");
    }
}

#[test]
fn calibrate_fixture_matches_expected_document() {
    let dir = tempfile::tempdir().unwrap();
    let out_json = dir.path().join("result.json");
    let out = run(&[
        "calibrate",
        "--input",
        fixture().to_str().unwrap(),
        "--output",
        out_json.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{out:?}");

    let written: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out_json).unwrap()).unwrap();
    let expected_path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../core/tests/data/fixture_expected.json");
    let expected: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(expected_path).unwrap()).unwrap();
    for field in ["mu", "sigma", "gamma"] {
        let got = written[field].as_f64().unwrap();
        let want = expected[field].as_f64().unwrap();
        assert!((got - want).abs() < 1e-9, "{field}: {got} vs {want}");
    }
    assert_eq!(written["n_days"], expected["n_days"]);
}

#[test]
fn calibrate_missing_file_is_an_io_error() {
    let out = run(&["calibrate", "--input", "/definitely/not/here.csv"]);
    assert_eq!(out.status.code(), Some(5));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
}

#[test]
fn calibrate_malformed_row_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "date,open,high,low,close\n2023-10-02,10,9,11,10\n").unwrap();
    let out = run(&["calibrate", "--input", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
}

#[test]
fn unknown_table_id_is_a_usage_error() {
    let out = run(&["reproduce", "--table", "7", "--stock", "apple"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bad_fee_spec_is_a_usage_error() {
    let out = run(&["best-response", "--fee", "cubic:1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bad_params_document_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let params = dir.path().join("params.json");
    std::fs::write(&params, "{\"horizon\": 10").unwrap();
    let out = run(&[
        "--params",
        params.to_str().unwrap(),
        "best-response",
    ]);
    assert_eq!(out.status.code(), Some(3));
}

fn quality_args(out_dir: &Path, threads: &str) -> Vec<String> {
    [
        "--paths", "4000", "--nodes", "8", "--seed", "7",
        "--threads", threads,
        "--out", out_dir.to_str().unwrap(),
        "market-quality", "--beliefs", "minus-sigma", "--close", "p=0.3",
        "--rho", "0.1,1.0",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect()
}

#[test]
fn quality_csv_is_byte_identical_across_thread_counts() {
    let d1 = tempfile::tempdir().unwrap();
    let d2 = tempfile::tempdir().unwrap();
    let out1 = bin().args(quality_args(d1.path(), "1")).output().unwrap();
    assert!(out1.status.success(), "{out1:?}");
    let out2 = bin().args(quality_args(d2.path(), "4")).output().unwrap();
    assert!(out2.status.success(), "{out2:?}");

    let a = std::fs::read(d1.path().join("market_quality.csv")).unwrap();
    let b = std::fs::read(d2.path().join("market_quality.csv")).unwrap();
    assert!(!a.is_empty());
    assert_eq!(a, b, "csv differs across worker counts");

    // header carries one stderr column per estimate, rows cover 1..=T
    let text = String::from_utf8(a).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap();
    assert!(header.contains("mq_se"));
    assert!(header.contains("mq_rho_1"));
    assert_eq!(lines.count(), 10);
}

#[test]
fn best_response_reports_a_grid_time() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "--paths", "3000", "--nodes", "8", "--seed", "11",
        "--out", dir.path().to_str().unwrap(),
        "best-response",
    ]);
    assert!(out.status.success(), "{out:?}");
    let doc: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("best_response.json")).unwrap(),
    )
    .unwrap();
    let tau_hat = doc["tau_hat"].as_u64().unwrap();
    assert!((1..=10).contains(&tau_hat));
    assert_eq!(doc["curve"].as_array().unwrap().len(), 10);
}

#[test]
fn optimize_single_candidate_writes_sweep_and_best() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "--paths", "3000", "--nodes", "8", "--seed", "13",
        "--out", dir.path().to_str().unwrap(),
        "optimize", "--objective", "total-spread",
        "--a-grid", "0.003", "--p-grid", "0",
    ]);
    assert!(out.status.success(), "{out:?}");
    let sweep = std::fs::read_to_string(dir.path().join("optimize_sweep.csv")).unwrap();
    // zero canonicalization keeps one zero-fee row out of the linear/square pair
    assert_eq!(sweep.lines().count(), 1 + 2);
    let best: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("optimize_best.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(best["reservation_satisfied"], true);
}

#[test]
fn cache_warms_a_second_run() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("cache");
    let args = |out: &Path| {
        [
            "--paths", "2000", "--nodes", "8", "--seed", "3",
            "--cache", cache.to_str().unwrap(),
            "--out", out.to_str().unwrap(),
            "best-response",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect::<Vec<_>>()
    };
    let d1 = tempfile::tempdir().unwrap();
    let first = bin().args(args(d1.path())).output().unwrap();
    assert!(first.status.success());
    let d2 = tempfile::tempdir().unwrap();
    let second = bin().args(args(d2.path())).output().unwrap();
    assert!(second.status.success());
    let err = String::from_utf8_lossy(&second.stderr);
    assert!(err.contains("warmed"), "no cache warm notice: {err}");

    let a = std::fs::read(d1.path().join("best_response.json")).unwrap();
    let b = std::fs::read(d2.path().join("best_response.json")).unwrap();
    assert_eq!(a, b, "cache changed the result");
}
