use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn config(name: &str) -> PathBuf {
    root().join("configs").join(name)
}

fn ellbc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ellbc")).args(args).output().expect("binary runs")
}

fn run_json(cfg: &Path, extra: &[&str]) -> (i32, Vec<u8>, String) {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let mut args = vec![cfg.to_str().unwrap(), "--json-out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    let o = ellbc(&args);
    let bytes = std::fs::read(&out).unwrap_or_default();
    (o.status.code().unwrap(), bytes, String::from_utf8_lossy(&o.stdout).into_owned())
}

fn write_config(dir: &tempfile::TempDir, text: &str) -> PathBuf {
    let p = dir.path().join("cfg.json");
    std::fs::write(&p, text).unwrap();
    p
}

const ALL: [&str; 10] = [
    "pauli_check_symbol.json",
    "rs_verify_n3.json",
    "ls_local_elliptic.json",
    "ls_chiral_fails.json",
    "index_aps.json",
    "index_spectral_flow.json",
    "deform_graph.json",
    "match_verify.json",
    "greens_check.json",
    "semigroup_check.json",
];

#[test]
fn shipped_configs_pass() {
    for name in ALL {
        let (code, _, stdout) = run_json(&config(name), &[]);
        assert_eq!(code, 0, "{name}:\n{stdout}");
    }
}

#[test]
fn reports_match_the_schema() {
    let schema: Value = serde_json::from_str(include_str!("../../../schema/report.schema.json")).unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();
    for name in ALL {
        let (_, bytes, _) = run_json(&config(name), &[]);
        let report: Value = serde_json::from_slice(&bytes).unwrap();
        let errors: Vec<String> = validator.iter_errors(&report).map(|e| e.to_string()).collect();
        assert!(errors.is_empty(), "{name}: {errors:?}");
    }
}

#[test]
fn json_is_byte_identical_across_runs_and_thread_counts() {
    for name in ["index_spectral_flow.json", "match_verify.json", "rs_verify_n3.json"] {
        let (_, a, _) = run_json(&config(name), &[]);
        let (_, b, _) = run_json(&config(name), &[]);
        let (_, c, _) = run_json(&config(name), &["--threads", "1"]);
        let (_, d, _) = run_json(&config(name), &["--threads", "3"]);
        assert!(!a.is_empty());
        assert_eq!(a, b, "{name}: repeated run differs");
        assert_eq!(a, c, "{name}: single thread differs");
        assert_eq!(a, d, "{name}: three threads differ");
    }
}

#[test]
fn json_keys_are_sorted_and_floats_round_trip() {
    let (_, bytes, _) = run_json(&config("pauli_check_symbol.json"), &[]);
    let text = String::from_utf8(bytes).unwrap();
    let v: Value = serde_json::from_str(&text).unwrap();
    let keys: Vec<&String> = v.as_object().unwrap().keys().collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
    let c = v["evidence"]["norm_bound_c"].as_f64().unwrap();
    assert!((c - 1.0).abs() < 1e-12);
    assert!(!text.contains("wall"), "wall time belongs to the text report only");
}

#[test]
fn text_report_shows_rank_gap() {
    let (_, _, stdout) = run_json(&config("index_spectral_flow.json"), &[]);
    assert!(stdout.contains("rank_gap"));
    assert!(stdout.contains("[PASS] expected index"));
}

#[test]
fn wrong_expectation_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let mut v: Value = serde_json::from_str(&std::fs::read_to_string(config("index_spectral_flow.json")).unwrap()).unwrap();
    v["expect"]["index"] = 0.into();
    let p = write_config(&dir, &v.to_string());
    let (code, bytes, stdout) = run_json(&p, &[]);
    assert_eq!(code, 1);
    assert!(stdout.contains("[FAIL] expected index"));
    let report: Value = serde_json::from_slice(&bytes).unwrap();
    assert_eq!(report["passed"], false);
}

#[test]
fn ragged_matrix_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_config(
        &dir,
        r#"{"kind": "check-symbol", "symbol": [[[[0,0],[1,0]],[[1,0]]], [[[0,0],[0,-1]],[[0,1],[0,0]]]]}"#,
    );
    let o = ellbc(&[p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("symbol"), "{err}");
}

#[test]
fn schema_violation_names_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_config(
        &dir,
        r#"{"kind": "index", "boundary_operator": {"a": [[[0,1]]], "b": [[[0,0]]]},
            "model": {"length": -1.0, "cutoff": 2, "nodes": 21},
            "boundary_conditions": {"left": {"type": "aps"}, "right": {"type": "aps"}}}"#,
    );
    let o = ellbc(&[p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("/model/length"), "{err}");
}

#[test]
fn unknown_fields_and_kinds_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    for text in [r#"{"kind": "nonsense"}"#, r#"{"kind": "rs-verify", "dimension": 3, "colour": 1}"#, "not json"] {
        let p = write_config(&dir, text);
        assert_eq!(ellbc(&[p.to_str().unwrap()]).status.code(), Some(2), "{text}");
    }
}

#[test]
fn rs_verify_rejects_low_dimension() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_config(&dir, r#"{"kind": "rs-verify", "dimension": 2}"#);
    assert_eq!(ellbc(&[p.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn missing_file_exits_two() {
    assert_eq!(ellbc(&["/nonexistent/config.json"]).status.code(), Some(2));
}
