use std::path::Path;
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;

fn syl(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_syl"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("spawn syl")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn read(dir: &Path, name: &str) -> Value {
    serde_json::from_slice(&std::fs::read(dir.join(name)).unwrap()).unwrap()
}

fn strip_time(mut v: Value) -> Value {
    v.as_object_mut().unwrap().remove("timestamp_unix");
    v
}

fn write(dir: &Path, name: &str, v: &Value) {
    std::fs::write(dir.join(name), serde_json::to_vec_pretty(v).unwrap()).unwrap();
}

fn solve(dir: &Path, k: &str) {
    let out = syl(dir, &["solve-annulus", "--a", "1", "--b", "4", "--n", "3", "--k", k, "--out-prefix", "ann"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
}

fn hyperplane_input(w1: f64) -> Value {
    json!({
        "point": {
            "n": 3, "w0": 1.0, "grad_w0": [0.0, 0.0],
            "hess_w0": [[0.0, 0.0], [0.0, 0.0]],
            "second_fund": [[0.0, 0.0], [0.0, 0.0]],
            "metric": [[1.0, 0.0], [0.0, 1.0]],
            "H_sigma": 0.0
        },
        "w1": w1,
        "grad_w1": [0.0, 0.0],
        "surface": { "kind": "hyperplane" }
    })
}

#[test]
fn reports_are_deterministic_apart_from_timestamp() {
    let runs: Vec<TempDir> = (0..2).map(|_| TempDir::new().unwrap()).collect();
    for d in &runs {
        solve(d.path(), "2");
        assert_eq!(code(&syl(d.path(), &["verify-sigma", "--from-solution", "ann", "--seed", "7"])), 0);
        assert_eq!(code(&syl(d.path(), &["expansion", "--from-solution", "ann"])), 0);
        assert_eq!(code(&syl(d.path(), &["fit-exponent", "--solution", "ann"])), 0);
    }
    for name in ["ann.report.json", "verify-sigma.report.json", "expansion.report.json", "ann.outer.holder.json"] {
        assert_eq!(strip_time(read(runs[0].path(), name)), strip_time(read(runs[1].path(), name)), "{name}");
    }
    for name in ["ann.csv", "ann.json", "ann.outer.holder.csv"] {
        assert_eq!(
            std::fs::read(runs[0].path().join(name)).unwrap(),
            std::fs::read(runs[1].path().join(name)).unwrap(),
            "{name}"
        );
    }
}

#[test]
fn junction_survives_the_file_round_trip() {
    let d = TempDir::new().unwrap();
    solve(d.path(), "2");
    assert_eq!(code(&syl(d.path(), &["verify-sigma", "--from-solution", "ann"])), 0);
    let solved = read(d.path(), "ann.report.json");
    let verified = read(d.path(), "verify-sigma.report.json");
    assert_eq!(solved["result"]["junction"], verified["result"]["junction"]);
    assert_eq!(verified["pass"], json!(true));
    let point = &verified["result"]["point"];
    assert_eq!(point["w0"], solved["result"]["junction"]["w0"]);
    assert_eq!(verified["result"]["minimality"]["minimal"], json!(true));
}

#[test]
fn solve_rejects_degenerate_annulus() {
    let d = TempDir::new().unwrap();
    let out = syl(d.path(), &["solve-annulus", "--a", "1", "--b", "1", "--n", "3", "--k", "2"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
}

#[test]
fn fit_exponent_rejects_smooth_solution() {
    let d = TempDir::new().unwrap();
    solve(d.path(), "1");
    assert_eq!(code(&syl(d.path(), &["fit-exponent", "--solution", "ann"])), 2);
}

#[test]
fn verify_sigma_rejects_indefinite_metric() {
    let d = TempDir::new().unwrap();
    let mut point = hyperplane_input(0.0)["point"].clone();
    point["metric"] = json!([[1.0, 0.0], [0.0, -1.0]]);
    write(d.path(), "point.json", &point);
    assert_eq!(code(&syl(d.path(), &["verify-sigma", "--input", "point.json", "--k", "2"])), 2);
}

#[test]
fn missing_solution_is_a_configuration_error() {
    let d = TempDir::new().unwrap();
    assert_eq!(code(&syl(d.path(), &["verify-sigma", "--from-solution", "nowhere"])), 2);
}

#[test]
fn expansion_exit_codes() {
    let d = TempDir::new().unwrap();
    // w1 = 0 on a flat surface balances but leaves no real coefficient.
    write(d.path(), "flat.json", &hyperplane_input(0.0));
    assert_eq!(code(&syl(d.path(), &["expansion", "--input", "flat.json"])), 4);
    // w1 = 1 breaks the leading-order balance.
    write(d.path(), "unbalanced.json", &hyperplane_input(1.0));
    let out = syl(d.path(), &["expansion", "--input", "unbalanced.json"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("leading_order_balance"));
}

#[test]
fn wrong_exponent_reports_failure() {
    let d = TempDir::new().unwrap();
    solve(d.path(), "2");
    let out = syl(d.path(), &["expansion", "--from-solution", "ann", "--p", "1.25", "--report", "p125.json"]);
    assert_eq!(code(&out), 0);
    let report = read(d.path(), "p125.json");
    assert_eq!(report["pass"], json!(false));
    assert!(report["result"]["limit"]["limit_residual"].as_f64().unwrap() > 1e-3);

    let out = syl(d.path(), &["expansion", "--from-solution", "ann", "--scan-p", "--report", "scan.json"]);
    assert_eq!(code(&out), 0);
    let report = read(d.path(), "scan.json");
    assert_eq!(report["pass"], json!(true));
    let passing: Vec<f64> = report["result"]["scan"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|r| r["pass"] == json!(true))
        .map(|r| r["p"].as_f64().unwrap())
        .collect();
    assert_eq!(passing, vec![1.5]);
}

#[test]
fn inner_side_expansion_passes() {
    let d = TempDir::new().unwrap();
    solve(d.path(), "2");
    let out = syl(d.path(), &["expansion", "--from-solution", "ann", "--side", "inner"]);
    assert_eq!(code(&out), 0);
    assert_eq!(read(d.path(), "expansion.report.json")["pass"], json!(true));
}

#[test]
fn sweep_is_independent_of_job_count() {
    let d = TempDir::new().unwrap();
    let args = |jobs: &'static str, dir: &'static str| {
        vec!["sweep", "--a", "1", "--b", "2,5", "--n", "3,4", "--k", "1,2", "--jobs", jobs, "--out-dir", dir]
    };
    assert_eq!(code(&syl(d.path(), &args("1", "s1"))), 0);
    assert_eq!(code(&syl(d.path(), &args("4", "s4"))), 0);
    let a = strip_time(read(d.path(), "s1/sweep.report.json"));
    let mut b = strip_time(read(d.path(), "s4/sweep.report.json"));
    b["config"] = a["config"].clone();
    b["input_hash"] = a["input_hash"].clone();
    assert_eq!(a["result"], b["result"]);
    let rows = a["result"].as_array().unwrap();
    assert_eq!(rows.len(), 8);
    for row in rows {
        let key = row["key"].as_str().unwrap();
        assert!(d.path().join("s1").join(format!("{key}.csv")).exists());
        assert_eq!(
            std::fs::read(d.path().join("s1").join(format!("{key}.json"))).unwrap(),
            std::fs::read(d.path().join("s4").join(format!("{key}.json"))).unwrap()
        );
    }
}
