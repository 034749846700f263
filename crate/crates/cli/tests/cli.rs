//! End-to-end runs of the `joinfd` binary.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn joinfd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_joinfd"))
        .args(args)
        .env_remove("JOINFD_ROW_LIMIT")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_owned()
}

fn proof_files(dir: &Path) -> (String, String) {
    (
        write(dir, "L.csv", "X,A\n0,0\n1,0\n1,1\n2,2\n"),
        write(dir, "R.csv", "Y,A',b\n0,0,0\n1,0,0\n1,1,1\n2,1,0\n"),
    )
}

fn has_fd(report: &Value, lhs: &[&str], rhs: &str) -> bool {
    report["fds"].as_array().unwrap().iter().any(|f| {
        let l: Vec<&str> = f["lhs"].as_array().unwrap().iter().map(|v| v.as_str().unwrap()).collect();
        l == lhs && f["rhs"] == rhs
    })
}

#[test]
fn join_discover_reports_the_cross_table_dependency() {
    let dir = tempfile::tempdir().unwrap();
    let (l, r) = proof_files(dir.path());
    let report = json(&joinfd(&["join-discover", "--left", &l, "--right", &r, "--on", "X=Y"]));
    assert_eq!(report["schema_version"], 1);
    assert_eq!(report["strategy"], "selective");
    assert!(has_fd(&report, &["L.A", "R.A'"], "R.b"), "{report}");
    assert!(report["counters"].get("full_join_rows_materialized").is_none());
}

#[test]
fn oracle_and_selective_agree_through_compare() {
    let dir = tempfile::tempdir().unwrap();
    let (l, r) = proof_files(dir.path());
    let sel = joinfd(&["join-discover", "--left", &l, "--right", &r, "--on", "X=Y"]);
    let ora = joinfd(&["join-discover", "--left", &l, "--right", &r, "--on", "X=Y", "--strategy", "oracle"]);
    let sel_path = write(dir.path(), "sel.json", &String::from_utf8(sel.stdout).unwrap());
    let ora_path = write(dir.path(), "ora.json", &String::from_utf8(ora.stdout).unwrap());
    let m = json(&joinfd(&["compare", "--truth", &ora_path, "--candidate", &sel_path]));
    assert_eq!(m["precision"], 1.0);
    assert_eq!(m["recall"], 1.0);
}

#[test]
fn sampling_flags_and_chain() {
    let dir = tempfile::tempdir().unwrap();
    let (l, r) = proof_files(dir.path());
    let s = write(dir.path(), "S.csv", "b,c\n0,x\n1,y\n");
    let report = json(&joinfd(&[
        "join-discover", "--left", &l, "--right", &r, "--on", "X=Y", "--strategy", "sampling", "--nb", "2", "--seed", "7",
    ]));
    assert_eq!(report["strategy"], "sampling");
    assert!(report["counters"]["sample_size_ratio"].is_number());
    let chain = json(&joinfd(&[
        "join-discover", "--left", &l, "--right", &r, "--on", "X=Y", "--right", &s, "--on", "R.b=b",
    ]));
    assert!(chain["counters"]["intermediate_rows_materialized"].as_u64().unwrap() > 0);
    assert!(has_fd(&chain, &["R.b"], "S.b") && has_fd(&chain, &["S.b"], "S.c"), "{chain}");
}

#[test]
fn coverage_prints_exact_ratios() {
    let dir = tempfile::tempdir().unwrap();
    let (l, r) = proof_files(dir.path());
    let c = json(&joinfd(&["coverage", "--left", &l, "--right", &r, "--on", "X=Y"]));
    assert_eq!(c["coverage"]["exact"], "4/3");
}

#[test]
fn discover_single_table_with_null_token() {
    let dir = tempfile::tempdir().unwrap();
    let t = write(dir.path(), "t.csv", "a;b\n1;NA\n2;x\n2;x\n");
    let out = json(&joinfd(&["discover", "--input", &t, "--delimiter", ";", "--null-token", "NA"]));
    assert_eq!(out["rows"], 3);
    assert!(has_fd(&out, &["t.a"], "t.b") || has_fd(&out, &["a"], "b"), "{out}");
}

#[test]
fn fixture_round_trips_into_join_discover() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("fx");
    let meta = json(&joinfd(&["fixture", "--profile", "upstage-positive,dangling=0.3", "--seed", "3", "--out-dir", out_dir.to_str().unwrap()]));
    assert_eq!(meta["op"], "inner");
    let on = meta["on"].as_str().unwrap();
    let left = out_dir.join("left.csv");
    let right = out_dir.join("right.csv");
    let eps = meta["epsilon"].to_string();
    let report = json(&joinfd(&[
        "join-discover", "--left", left.to_str().unwrap(), "--right", right.to_str().unwrap(), "--on", on,
        "--epsilon", &eps,
    ]));
    assert!(report["origin_counts"]["upstaged-left"].as_u64().unwrap() >= 1, "{report}");
}

#[test]
fn provided_dependencies_are_used() {
    let dir = tempfile::tempdir().unwrap();
    let (l, r) = proof_files(dir.path());
    let lf = write(dir.path(), "lf.json", "[]");
    let rf = write(dir.path(), "rf.json", r#"[{"lhs":["Y","A'"],"rhs":"b"},{"lhs":["Y","b"],"rhs":"A'"}]"#);
    let afds = format!("{lf},{rf}");
    let report = json(&joinfd(&["join-discover", "--left", &l, "--right", &r, "--on", "X=Y", "--afds", &afds]));
    assert!(has_fd(&report, &["R.Y", "R.A'"], "R.b") || has_fd(&report, &["L.X", "R.A'"], "R.b"), "{report}");
}

#[test]
fn exit_codes_follow_the_error_class() {
    let dir = tempfile::tempdir().unwrap();
    let (l, r) = proof_files(dir.path());
    let bad = joinfd(&["join-discover", "--left", &l, "--right", &r, "--on", "nope=Y"]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(bad.stdout.is_empty());
    assert!(String::from_utf8_lossy(&bad.stderr).contains("nope"));
    let missing = joinfd(&["discover", "--input", "/nonexistent/t.csv"]);
    assert_eq!(missing.status.code(), Some(2));
    let limited = Command::new(env!("CARGO_BIN_EXE_joinfd"))
        .args(["join-discover", "--left", &l, "--right", &r, "--on", "X=Y", "--strategy", "oracle"])
        .env("JOINFD_ROW_LIMIT", "2")
        .output()
        .unwrap();
    assert_eq!(limited.status.code(), Some(3));
    let op = joinfd(&["join-discover", "--left", &l, "--right", &r, "--op", "cross"]);
    assert_eq!(op.status.code(), Some(2));
}
