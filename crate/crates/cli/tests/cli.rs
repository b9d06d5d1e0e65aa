use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn lnc(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lnc"))
        .args(args)
        .current_dir(dir)
        .env("LNC_LOG_DIR", dir.join("log"))
        .env_remove("LNC_BUDGET_MS")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn log_lines(dir: &Path) -> Vec<Value> {
    std::fs::read_to_string(dir.join("log/runs.ndjson"))
        .unwrap_or_default()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

#[test]
fn swirl_over_gf5_is_solvable() {
    let dir = tempfile::tempdir().unwrap();
    let out = lnc(dir.path(), &["check", "scalar", "--family", "swirl", "--omega", "6", "--q", "5"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["solvable"], true);
    for (q, expect) in [(4, false), (7, true), (8, false)] {
        let q = q.to_string();
        let out = lnc(dir.path(), &["check", "scalar", "--family", "swirl", "--omega", "6", "--q", &q]);
        assert_eq!(json(&out)["solvable"], expect, "q = {q}");
    }
}

#[test]
fn combination_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let gen = lnc(dir.path(), &["net", "gen", "--family", "combination", "--n", "4", "-o", "net.json"]);
    assert_eq!(gen.status.code(), Some(0));
    assert!(dir.path().join("net.json").exists());
    for (q, expect) in [("2", false), ("3", true)] {
        let out = lnc(dir.path(), &["check", "scalar", "--net", "net.json", "--q", q]);
        assert_eq!(json(&out)["solvable"], expect);
        // the closed form and the exhaustive search agree
        let out = lnc(dir.path(), &["check", "scalar", "--net", "net.json", "--q", q, "--brute"]);
        assert_eq!(json(&out)["solvable"], expect);
    }
}

#[test]
fn swirl_search_certifies_nonexistence() {
    let dir = tempfile::tempdir().unwrap();
    let out = lnc(dir.path(), &["search", "swirl", "--omega", "6", "--L", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["found"], false);
    assert_eq!(v["exhausted"], true);
    let out = lnc(dir.path(), &["search", "swirl", "--omega", "3", "--L", "3", "--prefix"]);
    assert_eq!(json(&out)["tuples"], 2304);
}

#[test]
fn expired_budget_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = lnc(dir.path(), &["--budget-ms", "0", "search", "swirl", "--omega", "6", "--L", "3"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["exhausted"], false);
    let out = lnc(dir.path(), &["construct", "thm5", "--p", "5"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["error"], "budget");
}

#[test]
fn bad_input_and_bad_flags() {
    let dir = tempfile::tempdir().unwrap();
    let out = lnc(dir.path(), &["field", "--p", "4"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["error"], "invalid");
    let out = lnc(dir.path(), &["code", "verify", "missing.json", "missing.json"]);
    assert_eq!(out.status.code(), Some(1));
    let out = lnc(dir.path(), &["check", "scalar", "--frobnicate"]);
    assert_eq!(out.status.code(), Some(64));
    assert!(out.stdout.is_empty());
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
}

#[test]
fn witness_lift_sum_and_simulate() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    lnc(d, &["net", "gen", "--family", "swirl", "--omega", "3", "-o", "s.json"]);
    let out = lnc(d, &["check", "scalar", "--family", "swirl", "--omega", "3", "--q", "9", "--witness-out", "w.json"]);
    assert_eq!(json(&out)["solvable"], true);
    assert_eq!(json(&lnc(d, &["code", "verify", "s.json", "w.json"]))["is_solution"], true);
    lnc(d, &["code", "lift", "w.json", "-o", "lifted.json"]);
    let sum = lnc(d, &["code", "dsum", "--net", "s.json", "w.json", "lifted.json", "-o", "sum.json"]);
    assert_eq!(json(&sum)["dim"], 4);
    assert_eq!(json(&lnc(d, &["code", "verify", "s.json", "sum.json"]))["is_solution"], true);
    let sim = lnc(d, &["--seed", "3", "simulate", "s.json", "sum.json", "--trials", "25"]);
    assert_eq!(json(&sim)["passed"], true);
}

#[test]
fn conditions_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = lnc(dir.path(), &["construct", "scaled", "--omega", "4", "--d", "3", "--tuple-out", "t.json"]);
    assert_eq!(json(&out)["network_solution"], true);
    let out = lnc(dir.path(), &["check", "vector-conditions", "t.json"]);
    assert_eq!(json(&out)["holds"], true);
}

#[test]
fn repeated_runs_are_identical_apart_from_timing() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["--seed", "7", "construct", "prop4", "--l", "3", "--omega", "484", "--spotcheck", "300"];
    let (a, b) = (lnc(dir.path(), &args), lnc(dir.path(), &args));
    let (mut va, mut vb) = (json(&a), json(&b));
    assert!(va["timing"]["wall_s"].is_number());
    va.as_object_mut().unwrap().remove("timing");
    vb.as_object_mut().unwrap().remove("timing");
    assert_eq!(va, vb);
    assert_eq!(va["certificate"]["unsolvable"], true);
    let log = log_lines(dir.path());
    assert_eq!(log.len(), 2);
    assert_eq!(log[0]["output_sha256"], log[1]["output_sha256"]);
    assert_eq!(log[0]["exit_code"], 0);
    assert_eq!(log[0]["config"]["seed"], 7);
}

#[test]
fn every_invocation_is_logged_with_input_digests() {
    let dir = tempfile::tempdir().unwrap();
    lnc(dir.path(), &["net", "gen", "--family", "combination", "--n", "3", "-o", "c.json"]);
    lnc(dir.path(), &["net", "info", "c.json"]);
    lnc(dir.path(), &["--nope"]);
    let log = log_lines(dir.path());
    assert_eq!(log.len(), 3);
    let bytes = std::fs::read(dir.path().join("c.json")).unwrap();
    let digest = {
        use sha2::Digest;
        hex::encode(sha2::Sha256::digest(&bytes))
    };
    assert_eq!(log[1]["inputs"][0]["sha256"], digest.as_str());
    assert_eq!(log[2]["exit_code"], 64);
}
