use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;

fn symcalc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_symcalc")).args(args).output().expect("binary runs")
}

fn write(dir: &TempDir, name: &str, value: &Value) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, serde_json::to_string(value).unwrap()).unwrap();
    p
}

fn json_out(o: &Output) -> Value {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn scalar(degree: f64, value: f64) -> Value {
    json!({"degree": degree, "plus": [[0, [[[value, 0.0]]]]], "minus": [[0, [[[value, 0.0]]]]]})
}

fn approx(v: &Value, re: f64, tol: f64) {
    let got = v[0].as_f64().unwrap();
    assert!((got - re).abs() <= tol && v[1].as_f64().unwrap().abs() <= tol, "{v} vs {re}");
}

#[test]
fn residue_examples() {
    let dir = TempDir::new().unwrap();
    let inv_sqrt = write(&dir, "w.json", &json!({"order": -1, "fiber_dim": 1, "components": [scalar(-1.0, 1.0), scalar(-2.0, 0.0)]}));
    let r = json_out(&symcalc(&["residue", s(&inv_sqrt)]));
    approx(&r["residue"], 2.0, 1e-14);
    approx(&r["zero_modes"]["plus"], 1.0, 1e-14);
    assert_eq!(r["config"]["command"], "residue");
    assert_eq!(r["seed"], 0);

    let mult = json!({"order": 0, "fiber_dim": 1, "components": [
        {"degree": 0, "plus": [[1, [[[0.5, 0.0]]]], [0, [[[2.0, 0.0]]]]], "minus": [[1, [[[0.5, 0.0]]]], [0, [[[2.0, 0.0]]]]]},
        {"degree": -1}, {"degree": -2}]});
    approx(&json_out(&symcalc(&["residue", s(&write(&dir, "m.json", &mult))]))["residue"], 0.0, 0.0);

    let low = json!({"order": -3, "fiber_dim": 1, "components": [scalar(-3.0, 4.0)]});
    approx(&json_out(&symcalc(&["residue", s(&write(&dir, "l.json", &low))]))["residue"], 0.0, 0.0);
}

#[test]
fn schema_and_usage_errors_exit_2() {
    let dir = TempDir::new().unwrap();
    let bad = write(&dir, "bad.json", &json!({"order": 0, "fiber_dim": 2, "components": [scalar(0.0, 1.0)]}));
    assert_eq!(symcalc(&["residue", s(&bad)]).status.code(), Some(2));
    let typo = write(&dir, "typo.json", &json!({"order": 0, "fiber_dim": 1, "component": []}));
    assert_eq!(symcalc(&["residue", s(&typo)]).status.code(), Some(2));
    assert_eq!(symcalc(&["residue", "/nonexistent.json"]).status.code(), Some(2));
    assert_eq!(symcalc(&["verify", "everything"]).status.code(), Some(2));
    assert_eq!(symcalc(&["verify", "traces", "--eps-min", "-1"]).status.code(), Some(2));
    let ok = write(&dir, "ok.json", &json!({"order": 0, "fiber_dim": 1, "components": [scalar(0.0, 1.0)]}));
    assert_eq!(symcalc(&["symbol-trace", s(&ok), "--dist", "nonsense"]).status.code(), Some(2));
    let half = write(&dir, "half.json", &json!({"order": 0.5, "fiber_dim": 1, "components": [scalar(0.5, 1.0)]}));
    assert_eq!(symcalc(&["heat-fit", s(&half)]).status.code(), Some(2));
}

#[test]
fn symbol_trace_by_distribution_name() {
    let dir = TempDir::new().unwrap();
    let a = json!({"order": 0, "fiber_dim": 1, "components": [
        {"degree": 0, "plus": [[0, [[[3.0, 0.0]]]], [1, [[[1.0, 0.0]]]]], "minus": [[0, [[[5.0, 0.0]]]]]}]});
    let p = write(&dir, "a.json", &a);
    let trace = |d: &str| json_out(&symcalc(&["symbol-trace", s(&p), "--dist", d]))["trace"].clone();
    approx(&trace("uniform+"), 3.0, 1e-14);
    approx(&trace("uniform-"), 5.0, 1e-14);
    approx(&trace("uniform"), 8.0, 1e-14);
    approx(&trace("mode:1:+"), 1.0, 1e-14);
    approx(&trace("delta:0:+"), 4.0, 1e-14);
    approx(&trace("d(uniform+)"), 0.0, 1e-14);
}

#[test]
fn heat_fit_identity_reports_a0_pair_and_csv() {
    let dir = TempDir::new().unwrap();
    let id = write(&dir, "id.json", &json!({"order": 0, "fiber_dim": 1, "components": [scalar(0.0, 1.0)]}));
    let out = dir.path().join("fit.json");
    let o = symcalc(&["heat-fit", s(&id), "--out", s(&out), "--eps-count", "30", "--seed", "11"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let root_pi = std::f64::consts::PI.sqrt();
    approx(&r["a0"]["predicted"], root_pi, 1e-12);
    assert!(r["a0"]["relative_diff"].as_f64().unwrap() < 1e-3);
    approx(&r["coefficients"][0], root_pi, 1e-3);
    assert_eq!(r["exponents"], json!([-0.5]));
    assert!(r["log_coefficient"].is_null());
    assert!(r["residual"].as_f64().unwrap() < 1e-8);
    assert_eq!(r["seed"], 11);
    assert_eq!(r["config"]["eps_count"], 30);
    assert_eq!(r["config"]["modes"], 2000);

    let mut rows = csv::Reader::from_path(out.with_extension("csv")).unwrap();
    assert_eq!(rows.headers().unwrap(), vec!["epsilon", "trace_re", "trace_im"]);
    assert_eq!(rows.records().count(), 30);
}

#[test]
fn heat_fit_log_coefficient() {
    let dir = TempDir::new().unwrap();
    let inv = write(&dir, "inv.json", &json!({"order": -1, "fiber_dim": 1, "components": [scalar(-1.0, 1.0)]}));
    let r = json_out(&symcalc(&["heat-fit", s(&inv), "--weight-exponent", "0.5", "--modes", "400000"]));
    approx(&r["b0"]["predicted"], -2.0, 1e-14);
    approx(&r["b0"]["fitted"], -2.0, 1e-3);
    assert!(r["a0"].is_null());
}

#[test]
fn heat_fit_zero_symbol_is_all_zero() {
    let dir = TempDir::new().unwrap();
    let zero = write(&dir, "z.json", &json!({"order": 0, "fiber_dim": 2, "components": [{"degree": 0}]}));
    let r = json_out(&symcalc(&["heat-fit", s(&zero), "--modes", "200", "--eps-min", "0.2", "--eps-max", "1"]));
    approx(&r["coefficients"][0], 0.0, 0.0);
    approx(&r["finite_part"], 0.0, 0.0);
    assert_eq!(r["residual"], 0.0);
}

#[test]
fn numerical_failures_exit_3() {
    let dir = TempDir::new().unwrap();
    let id = write(&dir, "id.json", &json!({"order": 0, "fiber_dim": 1, "components": [scalar(0.0, 1.0)]}));
    assert_eq!(symcalc(&["heat-fit", s(&id), "--eps-count", "3"]).status.code(), Some(3));
    assert_eq!(symcalc(&["heat-fit", s(&id), "--modes", "50", "--tol", "1e-300"]).status.code(), Some(3));
}

fn loop_json(modes: &[(i64, [f64; 3])]) -> Value {
    json!({"modes": modes.iter().map(|(k, v)| json!({"k": k, "vector": v.iter().map(|x| [*x, 0.0]).collect::<Vec<_>>()})).collect::<Vec<_>>()})
}

#[test]
fn loop_curvature_and_chern() {
    let dir = TempDir::new().unwrap();
    let u = write(&dir, "u.json", &loop_json(&[(0, [0.3, -0.2, 0.1]), (1, [0.5, 0.1, 0.0]), (-1, [0.5, 0.1, 0.0])]));
    let v = write(&dir, "v.json", &loop_json(&[(0, [0.0, 0.4, 0.2]), (2, [0.1, 0.0, 0.3]), (-2, [0.1, 0.0, 0.3])]));
    let r = json_out(&symcalc(&["loop-curvature", s(&u), s(&v)]));
    let norms = r["level_norms"].as_array().unwrap();
    assert_eq!(norms.len(), 4);
    assert!(norms[0][1].as_f64().unwrap() < 1e-12);
    assert!(norms[1][1].as_f64().unwrap() > 1e-6);
    approx(&r["residue"], 0.0, 1e-12);
    assert_eq!(r["curvature"]["fiber_dim"], 3);

    let flat = json_out(&symcalc(&["loop-curvature", s(&u), s(&v), "--connection", "conjugation"]));
    assert!(flat["level_norms"].as_array().unwrap().iter().all(|l| l[1].as_f64().unwrap() < 1e-10));

    let c = json_out(&symcalc(&["chern", s(&u), s(&v), "--modes", "1024"]));
    approx(&c["value"], 0.0, 1e-12);
    approx(&c["conditional_trace"]["extrapolated"], 0.0, 1e-12);
    assert_eq!(c["config"]["modes"], 1024);

    let wrong_dim = write(&dir, "w.json", &json!({"modes": [{"k": 0, "vector": [[1.0, 0.0]]}]}));
    assert_eq!(symcalc(&["chern", s(&wrong_dim), s(&v)]).status.code(), Some(2));
}

#[test]
fn verify_traces_passes() {
    let o = symcalc(&["verify", "traces", "--seed", "7"]);
    let text = String::from_utf8_lossy(&o.stdout);
    assert_eq!(o.status.code(), Some(0), "{text}");
    assert!(text.lines().filter(|l| l.starts_with("PASS")).count() >= 10);
    assert!(!text.contains("FAIL  "));
}

#[test]
fn verify_loopgroup_reports_residue_line() {
    let o = symcalc(&["verify", "loopgroup"]);
    let text = String::from_utf8_lossy(&o.stdout);
    assert_eq!(o.status.code(), Some(0), "{text}");
    assert!(text.lines().any(|l| l.starts_with("PASS") && l.contains("res_w(Ω^{1/2}(U,V)) ≈ 0")));
}

#[test]
fn verify_failure_exits_1() {
    let o = symcalc(&["verify", "traces", "--tol", "1e-300"]);
    let text = String::from_utf8_lossy(&o.stdout);
    assert_eq!(o.status.code(), Some(1), "{text}");
    assert!(text.lines().any(|l| l.starts_with("FAIL")));
}

#[test]
fn reports_are_byte_stable_and_thread_independent() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("report.json");
    let run = |threads: &str| {
        let o = Command::new(env!("CARGO_BIN_EXE_symcalc"))
            .args(["verify", "chern", "--seed", "5", "--out", s(&out)])
            .env("SYMCALC_THREADS", threads)
            .output()
            .unwrap();
        assert!(o.status.success());
        std::fs::read_to_string(&out).unwrap()
    };
    let a = run("1");
    let b = run("1");
    assert_eq!(a, b);
    let r: Value = serde_json::from_str(&a).unwrap();
    assert_eq!(r["seed"], 5);
    assert_eq!(r["config"]["threads"], 1);
    assert_eq!(r["failed"], 0);
    let c: Value = serde_json::from_str(&run("3")).unwrap();
    assert_eq!(c["checks"], r["checks"]);

    let bad = Command::new(env!("CARGO_BIN_EXE_symcalc")).args(["verify", "chern"]).env("SYMCALC_THREADS", "zero").output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
}
