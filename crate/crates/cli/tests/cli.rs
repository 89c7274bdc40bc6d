use std::io::Write;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_smoothcount");

fn run(args: &[&str], stdin: Option<&str>) -> Output {
    let mut cmd = Command::new(BIN);
    cmd.args(args).stdin(std::process::Stdio::piped()).stdout(std::process::Stdio::piped()).stderr(std::process::Stdio::piped());
    let mut child = cmd.spawn().unwrap();
    let mut pipe = child.stdin.take().unwrap();
    pipe.write_all(stdin.unwrap_or("").as_bytes()).unwrap();
    drop(pipe);
    child.wait_with_output().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn random_instance(dir: &Path, seed: &str, n: &str, m: &str, delta: &str) -> String {
    let out = run(&["--seed", seed, "random", "--n", n, "--m", m, "--certified", delta], None);
    assert!(out.status.success());
    write(dir, &format!("r{seed}_{n}.json"), std::str::from_utf8(&out.stdout).unwrap())
}

const K4: &str = r#"{"vertices": 4, "edges": [[0, 1], [0, 2], [0, 3], [1, 2], [1, 3], [2, 3]]}"#;

#[test]
fn eval_agrees_with_oracle() {
    let dir = tempfile::tempdir().unwrap();
    for seed in ["1", "2", "3"] {
        let file = random_instance(dir.path(), seed, "12", "4", "0.6");
        let est = json(&run(&["--input", &file, "eval"], None));
        let exact = json(&run(&["--input", &file, "oracle", "expect"], None));
        assert_eq!(est["certified"], true);
        let (a, b) = (est["value"].as_f64().unwrap(), exact["value"].as_f64().unwrap());
        assert!((a - b).abs() <= 1e-3 * b, "{a} vs {b}");
    }
}

#[test]
fn hypergraph_k4_is_certified() {
    let out = run(&["hyper", "perfect"], Some(K4));
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["evaluation"]["certified"], true);
    assert_eq!(v["k"], 2);
    assert_eq!(v["Delta"], 3);
}

#[test]
fn gamma_uniform_constants() {
    for (degree, lo, hi) in [("3", 0.025, 0.026), ("inf", 0.17, 0.18)] {
        let out = run(&["--delta", "1e-6", "gamma", "uniform", "--k", "2", "--Delta", degree], None);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let t = json(&out)["t"].as_f64().unwrap();
        assert!((lo..hi).contains(&t), "Δ = {degree}: t = {t}");
    }
}

#[test]
fn uncertifiable_eval_exits_2_with_report() {
    let text = r#"{"m": 1, "n": 2, "entries": [[0, 0, 1.0], [0, 1, 1.0]], "beta": [1.0], "gamma": [5.0], "p": [0.9, 0.9]}"#;
    let out = run(&["eval"], Some(text));
    assert_eq!(out.status.code(), Some(2));
    let v = json(&out);
    assert_eq!(v["error"]["kind"], "certification");
    assert!(v["error"]["report"]["violations"].as_array().is_some_and(|a| !a.is_empty()));
}

#[test]
fn malformed_input_exits_4() {
    let out = run(&["eval"], Some("{\"m\": 1,\n  \"n\": }"));
    assert_eq!(out.status.code(), Some(4));
    let v = json(&out);
    assert_eq!(v["error"]["kind"], "input");
    assert_eq!(v["error"]["line"], 2);
}

#[test]
fn work_limit_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let file = random_instance(dir.path(), "5", "10", "3", "0.3");
    let out = run(&["--input", &file, "--work-limit", "3", "eval"], None);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn output_is_byte_identical_across_runs_and_threads() {
    let dir = tempfile::tempdir().unwrap();
    let file = random_instance(dir.path(), "7", "18", "5", "0.4");
    let first = run(&["--input", &file, "--epsilon", "1e-4", "eval"], None);
    assert!(first.status.success());
    assert_eq!(json(&first)["method"], "interpolation");
    for threads in ["1", "2", "4"] {
        let again = run(&["--input", &file, "--epsilon", "1e-4", "--threads", threads, "eval"], None);
        assert_eq!(again.stdout, first.stdout, "threads = {threads}");
    }
    let a = run(&["--seed", "11", "random", "--n", "6", "--m", "2"], None);
    let b = run(&["--seed", "11", "random", "--n", "6", "--m", "2"], None);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn ising_round_trip_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let file = random_instance(dir.path(), "9", "6", "3", "0.3");
    let model = run(&["--input", &file, "ising", "to"], None);
    assert!(model.status.success());
    let model_file = write(dir.path(), "model.json", std::str::from_utf8(&model.stdout).unwrap());
    let z = json(&run(&["--input", &model_file, "ising", "bruteforce"], None));
    let exact = json(&run(&["--input", &file, "oracle", "expect"], None))["value"].as_f64().unwrap();
    let via = z["expectation"]["value"].as_f64().unwrap();
    assert!((via - exact).abs() <= 1e-10 * exact);
}
