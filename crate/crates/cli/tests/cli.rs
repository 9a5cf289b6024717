use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn dalex(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dalex")).args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn json(out: &Output) -> Value {
    serde_json::from_str(&stdout(out)).unwrap()
}

fn probs(v: &Value) -> Vec<f64> {
    v["probs"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect()
}

#[test]
fn single_individual_is_always_selected() {
    let dir = TempDir::new().unwrap();
    let e = write(dir.path(), "e.csv", "4.5\n");
    let out = stdout(&dalex(&["select", e.to_str().unwrap(), "--count", "3"]));
    assert_eq!(out, "0\n0\n0\n");
}

#[test]
fn symmetric_pair_splits_evenly() {
    let dir = TempDir::new().unwrap();
    let e = write(dir.path(), "e.csv", "0,1\n1,0\n");
    let v = json(&dalex(&["select", e.to_str().unwrap(), "--count", "20000", "--emit-distribution"]));
    let p = probs(&v);
    assert_eq!(p.len(), 2);
    assert!((p[0] - 0.5).abs() < 0.02, "{p:?}");
}

#[test]
fn malformed_csv_names_the_line() {
    let dir = TempDir::new().unwrap();
    let e = write(dir.path(), "e.csv", "1,2\n3,oops\n");
    let out = dalex(&["select", e.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("line 2"), "{}", stderr(&out));
}

#[test]
fn support_shape_mismatch_exits_3() {
    let dir = TempDir::new().unwrap();
    let e = write(dir.path(), "e.csv", "1,2\n3,4\n");
    let s = write(dir.path(), "s.csv", "1,1,1\n1,1,1\n");
    let out = dalex(&["select", e.to_str().unwrap(), "--support", s.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
}

#[test]
fn unknown_method_exits_4_naming_the_key() {
    let dir = TempDir::new().unwrap();
    let e = write(dir.path(), "e.csv", "1,2\n3,4\n");
    let out = dalex(&["select", e.to_str().unwrap(), "--method", "tournament"]);
    assert_eq!(out.status.code(), Some(4));
    assert!(stderr(&out).contains("selector.method"), "{}", stderr(&out));
}

#[test]
fn unknown_config_key_is_rejected() {
    let dir = TempDir::new().unwrap();
    let e = write(dir.path(), "e.csv", "1\n");
    let c = write(dir.path(), "c.toml", "[selector]\npresure = 3\n");
    let out = dalex(&["select", e.to_str().unwrap(), "--config", c.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(4));
    assert!(stderr(&out).contains("presure"), "{}", stderr(&out));
}

#[test]
fn compare_against_itself_is_zero() {
    let dir = TempDir::new().unwrap();
    let e = write(dir.path(), "e.csv", "0,2,1\n1,0,2\n2,1,0\n0,2,1\n");
    let v = json(&dalex(&["compare", e.to_str().unwrap(), "--method", "lexicase", "--lineage", "0,3"]));
    let c = &v["candidates"][0];
    assert_eq!(c["js_divergence"].as_f64(), Some(0.0));
    assert_eq!(c["kind"], "exact");
    assert_eq!(v["population"], 4);
    assert_eq!(v["classes"], 3);
    for r in c["probability_ratios"].as_array().unwrap() {
        assert_eq!(r["ratio"].as_f64(), Some(1.0));
    }
}

#[test]
fn high_pressure_dalex_tracks_lexicase() {
    let dir = TempDir::new().unwrap();
    let e = write(dir.path(), "e.csv", "0,0\n0,1\n1,0\n");
    let v = json(&dalex(&["compare", e.to_str().unwrap(), "--samples", "100000"]));
    assert_eq!(probs(&v["reference"]), vec![1.0, 0.0, 0.0]);
    let js = v["candidates"][0]["js_divergence"].as_f64().unwrap();
    assert!(js < 0.005, "js = {js}");
}

#[test]
fn zero_pressure_dalex_is_mean_error_selection() {
    // Lexicase picks either row half the time; mean error always picks row 0.
    let dir = TempDir::new().unwrap();
    let e = write(dir.path(), "e.csv", "1,1\n0,3\n");
    let v = json(&dalex(&["compare", e.to_str().unwrap(), "--method", "dalex:pressure=0", "--samples", "1000"]));
    assert_eq!(probs(&v["candidates"][0]), vec![1.0, 0.0]);
    let js = v["candidates"][0]["js_divergence"].as_f64().unwrap();
    assert!((js - 0.215_8).abs() < 1e-3, "js = {js}");
}

#[test]
fn oracle_limits_need_explicit_fallback() {
    let dir = TempDir::new().unwrap();
    let rows: String = (0..70).map(|i| format!("{i},{}\n", 70 - i)).collect();
    let e = write(dir.path(), "e.csv", &rows);
    let path = e.to_str().unwrap();
    let out = dalex(&["compare", path, "--samples", "2000"]);
    assert_eq!(out.status.code(), Some(4), "{}", stderr(&out));
    let v = json(&dalex(&["compare", path, "--samples", "2000", "--allow-fallback"]));
    assert_eq!(v["reference"]["kind"], "empirical");
}

#[test]
fn one_generation_evolve_writes_one_record() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        dir.path(),
        "run.toml",
        "seed = 4\n[selector]\nmethod = \"lexicase\"\n[run]\npop_size = 10\ngenerations = 1\n",
    );
    let out_dir = dir.path().join("out");
    stdout(&dalex(&["evolve", "--config", cfg.to_str().unwrap(), "--output", out_dir.to_str().unwrap()]));
    let records = fs::read_to_string(out_dir.join("records.jsonl")).unwrap();
    let lines: Vec<&str> = records.lines().collect();
    assert_eq!(lines.len(), 1);
    let rec: Value = serde_json::from_str(lines[0]).unwrap();
    assert_eq!(rec["seed"], 4);
    assert_eq!(rec["parents"].as_array().unwrap().len(), 10);
    let summary = fs::read_to_string(out_dir.join("summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 2);
    assert!(!out_dir.join("fidelity.jsonl").exists());
}

#[test]
fn bench_accepts_a_single_individual() {
    let dir = TempDir::new().unwrap();
    let csv = dir.path().join("bench.csv");
    stdout(&dalex(&[
        "bench",
        "--n",
        "1",
        "--m",
        "5",
        "--regime",
        "discrete,partial_support",
        "--repetitions",
        "3",
        "--output",
        csv.to_str().unwrap(),
    ]));
    let text = fs::read_to_string(csv).unwrap();
    assert!(text.starts_with("method,n,m,regime,"));
    assert_eq!(text.lines().count(), 5);
}
