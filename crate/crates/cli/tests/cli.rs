//! End-to-end runs of the `cfree` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn cfree(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cfree"))
        .args(args)
        .env_remove("CFREE_LOG")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn path_str(p: &Path) -> &str {
    p.to_str().expect("utf-8 path")
}

#[test]
fn cfree_suite_passes() {
    let out = cfree(&["verify", "--suite", "cfree", "--dims", "3,3,3,3", "--depth", "6", "--seed", "42", "--trials", "20", "--tol", "1e-9"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.starts_with("suite"));
    assert!(stdout.lines().nth(1).unwrap().contains("pass"));
}

#[test]
fn boolean_specialization_passes() {
    let out = cfree(&["verify", "--suite", "specializations", "--dims", "2,1,2,1", "--trials", "2"]);
    assert_eq!(code(&out), 0);
}

#[test]
fn degenerate_dims_pass_vacuously() {
    let out = cfree(&["verify", "--suite", "all", "--seed", "0", "--trials", "1", "--dims", "1,1,1,1"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
}

#[test]
fn zero_trials_write_empty_reports() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("r.jsonl");
    let out = cfree(&["verify", "--suite", "cfree", "--trials", "0", "--out", path_str(&json)]);
    assert_eq!(code(&out), 0);
    assert_eq!(fs::read_to_string(&json).unwrap(), "");

    let csv = dir.path().join("r.csv");
    let out = cfree(&["verify", "--suite", "cfree", "--trials", "0", "--out", path_str(&csv), "--format", "csv"]);
    assert_eq!(code(&out), 0);
    assert_eq!(fs::read_to_string(&csv).unwrap(), "suite,check,abs_err,rel_err,tol,pass\n");
}

#[test]
fn invalid_configs_exit_2() {
    for args in [
        vec!["verify", "--suite", "nonsense"],
        vec!["verify", "--suite", "free-copies", "--dims", "1,3,3,3"],
        vec!["verify", "--suite", "linearization-series", "--depth", "4", "--order", "6"],
        vec!["verify", "--dims", "3,0,3,3"],
        vec!["verify", "--dims", "3,3,3"],
        vec!["verify", "--tol", "-1"],
    ] {
        let out = cfree(&args);
        assert_eq!(code(&out), 2, "{args:?}");
    }
}

#[test]
fn bad_log_level_exits_2() {
    let out = Command::new(env!("CARGO_BIN_EXE_cfree"))
        .args(["verify", "--trials", "0"])
        .env("CFREE_LOG", "loud")
        .output()
        .unwrap();
    assert_eq!(code(&out), 2);
}

#[test]
fn reports_are_byte_identical_and_versioned() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let p = dir.path().join(name);
        let out = cfree(&["verify", "--suite", "psi-product", "--depth", "4", "--seed", "7", "--trials", "3", "--out", path_str(&p)]);
        assert_eq!(code(&out), 0);
        fs::read(p).unwrap()
    };
    let first = run("a.jsonl");
    assert_eq!(first, run("b.jsonl"));
    let text = String::from_utf8(first).unwrap();
    assert!(!text.is_empty());
    for line in text.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(v["schema"], 1);
        assert_eq!(v["suite"], "psi-product");
        assert_eq!(v["pass"], true);
    }
}

#[test]
fn trace_is_written() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("trace.csv");
    let out = cfree(&[
        "verify", "--suite", "linearization-analytic", "--dims", "2,2,2,2", "--depth", "4", "--trials", "1", "--trace", path_str(&trace),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
    let text = fs::read_to_string(trace).unwrap();
    assert!(text.starts_with("re_z,im_z"));
    assert_eq!(text.lines().count(), 1 + 8);
}

fn write_matrices(dir: &Path, entries: &[(&str, &str)]) {
    for (name, body) in entries {
        fs::write(dir.join(name), body).unwrap();
    }
}

fn moments_json(dir: &Path, files: [&str; 4], order: &str) -> serde_json::Value {
    let p = |f: &str| dir.join(f).to_str().unwrap().to_string();
    let out = cfree(&[
        "moments", "--t-alpha", &p(files[0]), "--s-alpha", &p(files[1]), "--t-beta", &p(files[2]), "--s-beta", &p(files[3]), "--order", order,
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn reals(v: &serde_json::Value) -> Vec<f64> {
    v.as_array().unwrap().iter().map(|z| z[0].as_f64().unwrap()).collect()
}

#[test]
fn moments_of_identity_and_zero_inputs() {
    let dir = tempfile::tempdir().unwrap();
    write_matrices(
        dir.path(),
        &[("id.json", "[[[1,0],[0,0]],[[0,0],[1,0]]]"), ("zero.json", "[[[0,0],[0,0]],[[0,0],[0,0]]]")],
    );
    let v = moments_json(dir.path(), ["id.json"; 4], "5");
    assert_eq!(v["schema"], 1);
    for e in &v["elements"].as_array().unwrap()[..2] {
        assert_eq!(reals(&e["moments"]["phi_moments"]), vec![1.0; 5]);
        assert_eq!(reals(&e["moments"]["psi_moments"]), vec![1.0; 5]);
        assert_eq!(reals(&e["r_coeffs"]), vec![1.0, 0.0, 0.0, 0.0, 0.0]);
    }

    let v = moments_json(dir.path(), ["zero.json"; 4], "5");
    for e in v["elements"].as_array().unwrap() {
        assert_eq!(reals(&e["moments"]["phi_moments"]), vec![0.0; 5]);
        assert_eq!(reals(&e["r_coeffs"]), vec![0.0; 5]);
    }
}

#[test]
fn moments_of_flip_input() {
    let dir = tempfile::tempdir().unwrap();
    write_matrices(
        dir.path(),
        &[("flip.json", "[[[0,0],[1,0]],[[1,0],[0,0]]]"), ("zero.json", "[[[0,0],[0,0]],[[0,0],[0,0]]]")],
    );
    let v = moments_json(dir.path(), ["flip.json", "flip.json", "zero.json", "zero.json"], "8");
    let r = reals(&v["elements"][0]["r_coeffs"]);
    let want = [0.0, 1.0, 0.0, -1.0, 0.0, 2.0, 0.0, -5.0];
    for (got, want) in r.iter().zip(want) {
        assert!((got - want).abs() < 1e-12, "{r:?}");
    }
}

#[test]
fn malformed_matrix_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    write_matrices(dir.path(), &[("bad.json", "[[1, 2]]"), ("z.json", "[[[0,0]]]")]);
    let p = |f: &str| dir.path().join(f).to_str().unwrap().to_string();
    let out = cfree(&["moments", "--t-alpha", &p("bad.json"), "--s-alpha", &p("z.json"), "--t-beta", &p("z.json"), "--s-beta", &p("z.json")]);
    assert_eq!(code(&out), 2);
}

#[test]
fn failed_check_exits_1() {
    let out = cfree(&["verify", "--suite", "haagerup-lemmas", "--depth", "6", "--trials", "2", "--tol", "1e-30"]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8(out.stdout).unwrap().contains("FAIL"));
}
