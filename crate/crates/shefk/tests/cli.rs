//! End-to-end tests of the command-line binary: flag/config precedence,
//! output formats, replay, and exit codes.

use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_shefk")).args(args).output().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn solve_writes_csv_with_header() {
    let out = run(&["solve", "--t", "0.5", "--k", "10", "--paths", "200", "--seed", "3"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    let mut lines = text.lines();
    let header = lines.next().unwrap();
    assert!(header.starts_with("config_hash,"), "header: {header}");
    assert!(header.contains("estimate"));
    assert_eq!(lines.count(), 1);
}

#[test]
fn json_output_carries_provenance() {
    let out = run(&[
        "solve", "--t", "0.5", "--k", "10", "--paths", "200", "--seed", "3", "--format", "json",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(doc["provenance"]["config_hash"].is_string());
    assert_eq!(doc["provenance"]["seed"], 3);
    assert_eq!(doc["config"]["k"], 10);
    assert!(doc["results"].as_array().unwrap().len() == 1);
}

#[test]
fn config_file_applies_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{ "t": 0.25, "k": 7, "paths": 150, "seed": 11 }"#).unwrap();
    let base = run(&["solve", "--config", cfg.to_str().unwrap(), "--format", "json"]);
    assert!(base.status.success(), "{}", stderr(&base));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&base)).unwrap();
    assert_eq!(doc["config"]["k"], 7);
    assert_eq!(doc["config"]["t"], 0.25);

    // a flag overrides the same key from the file
    let over = run(&["solve", "--config", cfg.to_str().unwrap(), "--k", "9", "--format", "json"]);
    let doc: serde_json::Value = serde_json::from_str(&stdout(&over)).unwrap();
    assert_eq!(doc["config"]["k"], 9);
}

#[test]
fn unknown_config_key_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{ "t": 0.25, "kay": 7 }"#).unwrap();
    let out = run(&["solve", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("kay"), "stderr: {}", stderr(&out));
}

#[test]
fn bad_flag_is_a_usage_error() {
    let out = run(&["solve", "--no-such-flag"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bad_format_is_a_usage_error() {
    let out = run(&["solve", "--format", "xml"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn replay_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.json");
    let out = run(&[
        "converge-k",
        "--t", "0.5",
        "--k-list", "5,10",
        "--paths", "200",
        "--samples", "8",
        "--seed", "21",
        "--format", "json",
        "--out", path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(Path::new(&path).exists());

    let replay = run(&["converge-k", "--replay", path.to_str().unwrap()]);
    assert!(replay.status.success(), "replay: {}", stderr(&replay));

    // tamper with a stored result and the replay must fail
    let mut doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    doc["results"][0]["estimate"] = serde_json::json!(12345.0);
    std::fs::write(&path, serde_json::to_string_pretty(&doc).unwrap()).unwrap();
    let replay = run(&["converge-k", "--replay", path.to_str().unwrap()]);
    assert_eq!(replay.status.code(), Some(1));
}

#[test]
fn threads_do_not_change_output() {
    let mut texts = Vec::new();
    for threads in ["1", "4"] {
        let out = run(&[
            "solve",
            "--t", "0.5",
            "--k", "50",
            "--paths", "2000",
            "--seed", "5",
            "--threads", threads,
        ]);
        assert!(out.status.success(), "{}", stderr(&out));
        texts.push(stdout(&out));
    }
    assert_eq!(texts[0], texts[1]);
}

#[test]
fn validate_quick_passes_and_reports() {
    let out = run(&["validate", "--quick", "--seed", "1"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("hermite-orthonormality"));
    assert!(text.contains("determinism"));
}
