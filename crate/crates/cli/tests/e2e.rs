use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn cpairs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cpairs"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

fn structured(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

#[test]
fn forward_on_heisenberg_pair_exits_zero() {
    let out = cpairs(&["deform", "--example", "heisenberg6-pair", "--format", "structured"]);
    assert_eq!(code(&out), 0);
    let r = structured(&out);
    let v = &r["tasks"][0]["result"]["data"];
    assert_eq!(v["verdict"], "Holds");
    for group in ["hypotheses", "conclusions"] {
        for item in v[group].as_array().unwrap() {
            assert_ne!(item["status"], "Fail", "{item}");
        }
    }
}

#[test]
fn incompatible_family_exits_one_with_witness() {
    let out = cpairs(&["deform", "--example", "t6-pair-incompatible", "--format", "structured"]);
    assert_eq!(code(&out), 1);
    let r = structured(&out);
    let task = &r["tasks"][0];
    assert_eq!(task["result"]["data"]["verdict"], "NotApplicable");
    let failure = &task["failures"][0];
    let worst = &failure["worst"];
    let x0 = worst["point"][0].as_f64().unwrap();
    assert!(x0.cos().abs() > 0.9, "{failure}");
    assert!(failure["witness"]["point"].as_array().unwrap().len() == 6);
}

#[test]
fn bad_input_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "bad.toml",
        r#"
schema_version = 1
[[model]]
name = "t5"
kind = "builtin"
builtin = "torus"
dim = 5
[[form]]
name = "a"
model = "t5"
coeffs = ["cos(x0", 0, 0, 0, 0]
[[form]]
name = "b"
model = "t5"
coeffs = [0, 0, 0, 0, 1]
[[task]]
kind = "verify-pair"
model = "t5"
alpha = "b"
beta = "b"
k = 1
l = 1
"#,
    );
    let out = cpairs(&["run", "--config", &cfg]);
    assert_eq!(code(&out), 2);
    let err = String::from_utf8_lossy(&out.stderr);
    // both problems are reported, not just the first
    assert!(err.contains("position"), "{err}");
    assert!(err.contains("2k+2l+2 = 6"), "{err}");

    let out = cpairs(&["deform", "--example", "no-such-example"]);
    assert_eq!(code(&out), 2);
    let out = cpairs(&["deform", "--converse", "--example", "heisenberg6-pair", "--t-grid", "1,2"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn marginal_residuals_exit_three() {
    // with tol 0.5 the unit volume sits within 10x of the threshold
    let out = cpairs(&["verify-pair", "--example", "heisenberg6-pair", "--tol", "0.5"]);
    assert_eq!(code(&out), 3, "{}", String::from_utf8_lossy(&out.stdout));
}

#[test]
fn sweep_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "sweep.toml",
        r#"
schema_version = 1
seed = 3
[sampling]
kind = "random"
count = 500
[[task]]
kind = "sweep"
example = "t6-pair-incompatible"
t_grid = [-0.5, 0.01, 2.0]
output = "sweep.csv"
"#,
    );
    let out = cpairs(&["run", "--config", &cfg]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
    let mut rdr = csv::Reader::from_path(dir.path().join("sweep.csv")).unwrap();
    let header = rdr.headers().unwrap().clone();
    assert_eq!(&header[0], "t");
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 3);
    let min_at_small_t: f64 = rows[1][1].parse().unwrap();
    let max_at_small_t: f64 = rows[1][2].parse().unwrap();
    assert!(min_at_small_t < 0.0 && max_at_small_t > 0.0);
}

fn without_timing(mut v: Value) -> Value {
    v.as_object_mut().unwrap().remove("timing");
    v
}

#[test]
fn reports_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "det.toml",
        r#"
schema_version = 1
seed = 11
[sampling]
kind = "random"
count = 300
[[task]]
kind = "deform-forward"
example = "t6-pair-incompatible"
t_grid = [0.5, -1.0]
[[task]]
kind = "classify"
example = "darboux(2)"
"#,
    );
    let run = || {
        let out = cpairs(&["run", "--config", &cfg, "--format", "structured"]);
        without_timing(structured(&out))
    };
    let a = serde_json::to_string(&run()).unwrap();
    let b = serde_json::to_string(&run()).unwrap();
    assert_eq!(a, b);
    let other = cpairs(&["run", "--config", &cfg, "--format", "structured", "--seed", "12"]);
    assert_ne!(serde_json::to_string(&without_timing(structured(&other))).unwrap(), a);
    assert!(a.contains("\"seed\":11"));
}

#[test]
fn structured_report_goes_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let out = cpairs(&[
        "classify",
        "--example",
        "heisenberg3",
        "--format",
        "structured",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["tasks"][0]["result"]["data"]["k"], 1);
}

#[test]
fn text_witnesses_carry_full_precision() {
    let out = cpairs(&["deform", "--example", "t6-pair-incompatible", "--seed", "5"]);
    let text = String::from_utf8_lossy(&out.stdout);
    let line = text.lines().find(|l| l.trim_start().starts_with("witness:")).expect("witness line");
    let first = line.split('[').nth(1).unwrap().split(',').next().unwrap();
    let mantissa = first.split('e').next().unwrap().replace(['.', '-'], "");
    assert_eq!(mantissa.len(), 17, "{first}");
}

#[test]
fn examples_listing() {
    let out = cpairs(&["examples"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8_lossy(&out.stdout);
    for name in [
        "darboux(k)",
        "torus-contact",
        "heisenberg3",
        "heisenberg6-pair",
        "t6-pair-compatible",
        "t6-pair-incompatible",
        "t2-pair-type00",
    ] {
        assert!(text.contains(name), "{name}");
    }
    let out = cpairs(&["examples", "--filter", "t2", "--format", "structured"]);
    let v = structured(&out);
    assert_eq!(v.as_array().unwrap().len(), 1);
    assert_eq!(v[0]["pair_type"], serde_json::json!([0, 0]));
}

#[test]
fn jacobi_task_converges_on_the_compatible_pair() {
    let out = cpairs(&["jacobi", "--example", "t6-pair-compatible", "--format", "structured"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
    let v = structured(&out);
    let levels = v["tasks"][0]["result"]["data"]["levels"].as_array().unwrap().clone();
    assert_eq!(levels.len(), 2);
    assert_eq!(levels[0]["antisymmetry"], 0.0);
}
