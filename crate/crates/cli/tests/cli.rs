use std::fs;
use std::process::{Command, Output};

use serde_json::Value;

fn kingperm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kingperm"))
        .args(args)
        .env_remove("KINGPERM_CACHE_DIR")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("bad json ({e}): {}", stdout(out)))
}

#[test]
fn table_rows() {
    let out = kingperm(&["--format", "csv", "table", "--max-n", "1"]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out), "n,kings,cyl_kings,a_n,cb1,ratio\n1,1,1,0,0,1\n");

    let out = kingperm(&["table", "--max-n", "9"]);
    let rows = json(&out)["rows"].as_array().unwrap().clone();
    assert_eq!(rows.len(), 9);
    assert_eq!(rows[5]["kings"], "90");
    assert_eq!(rows[8]["cyl_kings"], "36954");
    assert_eq!(rows[4]["ratio"], "5/7");
    assert_eq!(rows[1]["ratio"], Value::Null);
}

#[test]
fn verify_subjects() {
    let out = kingperm(&["verify", "cbond2", "--max-n", "10"]);
    assert_eq!(code(&out), 0);
    let report = json(&out);
    assert_eq!(report["status"], "pass");
    assert_eq!(report["range"]["to"], 10);

    let out = kingperm(&["verify", "series-CK", "--max-n", "9"]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["status"], "pass");

    let out = kingperm(&["--format", "csv", "verify", "recursion", "--max-n", "12"]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out), "subject,from,to,status,n,expected,actual\nrecursion,5,12,pass,,,\n");
}

#[test]
fn series_dumps() {
    let h = json(&kingperm(&["series", "H", "--order", "3"]));
    assert_eq!(h["coefficients"][2], "6*u^2");
    let f = json(&kingperm(&["series", "F", "--order", "1"]));
    assert_eq!(f["coefficients"], serde_json::json!(["1"]));
    let ck = json(&kingperm(&["series", "CK", "--order", "5"]));
    assert_eq!(ck["coefficients"], serde_json::json!(["1", "0", "0", "0", "10"]));
    assert_eq!(ck["printed_comparison"]["exponent_1_matches"], true);
    assert_eq!(ck["printed_comparison"]["exponent_2_first_mismatch"], 2);
    assert_eq!(ck["printed_comparison"]["exponent_2"][1], "-2");
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        &["verify", "cbond9"][..],
        &["series", "F", "--order", "13"],
        &["oeis", "A000045"],
        &["table", "--max-n", "14"],
        &["table", "--format", "xml"],
        &["verify", "cbond1", "--max-n", "11"],
        &["bijections", "--max-n", "4"],
        &["frobnicate"],
    ] {
        let out = kingperm(args);
        assert_eq!(code(&out), 2, "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
    assert_eq!(code(&kingperm(&["--help"])), 0);
}

#[test]
fn oeis_offline() {
    let out = kingperm(&["--offline", "oeis", "A002464", "--max-n", "4"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["sequence"]["source"], "embedded-fixture");
    let terms: Vec<&str> = v["sequence"]["terms"].as_array().unwrap().iter().map(|t| t["value"].as_str().unwrap()).collect();
    assert_eq!(terms, ["1", "0", "0", "2"]);
    assert_eq!(code(&kingperm(&["--offline", "oeis", "A002493", "--max-n", "9"])), 0);
}

#[test]
fn mismatching_sequence_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("b002493.txt"), "1 1\n2 0\n3 0\n4 0\n5 11\n").unwrap();
    let path = dir.path().to_str().unwrap();
    let out = kingperm(&["oeis", "A002493", "--max-n", "5", "--cache-dir", path]);
    assert_eq!(code(&out), 1);
    let v = json(&out);
    assert_eq!(v["sequence"]["source"], "cached");
    assert_eq!(v["report"]["failures"][0], serde_json::json!({"n": 5, "expected": "11", "actual": "10"}));
}

#[test]
fn cache_dir_flag_beats_environment() {
    let bad = tempfile::tempdir().unwrap();
    let good = tempfile::tempdir().unwrap();
    fs::write(bad.path().join("b002464.txt"), "1 2\n").unwrap();
    fs::write(good.path().join("b002464.txt"), "1 1\n").unwrap();
    let run = |flag: Option<&str>| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_kingperm"));
        cmd.args(["oeis", "A002464", "--max-n", "1"]).env("KINGPERM_CACHE_DIR", bad.path());
        if let Some(f) = flag {
            cmd.args(["--cache-dir", f]);
        }
        code(&cmd.output().unwrap())
    };
    assert_eq!(run(None), 1);
    assert_eq!(run(Some(good.path().to_str().unwrap())), 0);
}

#[test]
fn offline_output_is_deterministic() {
    for args in [
        &["--offline", "oeis", "A002493", "--max-n", "10"][..],
        &["--format", "csv", "table", "--max-n", "11"],
        &["--threads", "2", "bijections", "--max-n", "7"],
    ] {
        let a = kingperm(args);
        let b = kingperm(args);
        assert_eq!(code(&a), 0, "{args:?}");
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn json_round_trips() {
    for args in [
        &["table", "--max-n", "6"][..],
        &["verify", "marked", "--max-n", "5"],
        &["series", "CK", "--order", "4"],
        &["bijections", "--max-n", "6"],
        &["--offline", "oeis", "A002464", "--max-n", "6"],
    ] {
        let out = kingperm(args);
        let v = json(&out);
        let again: Value = serde_json::from_str(&serde_json::to_string(&v).unwrap()).unwrap();
        assert_eq!(again, v, "{args:?}");
        assert_no_bare_big_numbers(&v);
    }
}

/// Only orders and small counters may be JSON numbers.
fn assert_no_bare_big_numbers(v: &Value) {
    match v {
        Value::Number(n) => assert!(n.as_u64().is_some_and(|x| x < 1_000_000), "bare number {n}"),
        Value::Array(items) => items.iter().for_each(assert_no_bare_big_numbers),
        Value::Object(map) => map.values().for_each(assert_no_bare_big_numbers),
        _ => {}
    }
}

#[test]
fn cap_override_warns() {
    let out = kingperm(&["--series-cap", "14", "series", "CK", "--order", "13"]);
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning: series cap set to 14"));
    assert_eq!(json(&out)["coefficients"][12], "702756210");
}

#[test]
fn export_writes_every_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let out = kingperm(&["--offline", "--max-n", "6", "--format", "csv", "export", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let mut names: Vec<String> = fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(names.len(), 1 + 3 + 1 + 12 + 2);
    assert!(names.contains(&"verify-series-H.csv".to_string()));
    let table = fs::read_to_string(dir.path().join("table.csv")).unwrap();
    assert_eq!(table.lines().count(), 7);
}
