use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_pucci-profile"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

const CUBIC: [&str; 8] = ["--spec", "cubic", "--a", "1", "--A", "1", "--alpha", "0"];

fn with<'a>(base: &[&'a str], extra: &[&'a str]) -> Vec<&'a str> {
    base.iter().chain(extra).copied().collect()
}

#[test]
fn gate_reports_balance_violation_for_unequal_constants() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("cubic.json");
    fs::write(&spec, r#"{"kind": "cubic"}"#).unwrap();
    let out = run(&["gate", "--spec", spec.to_str().unwrap(), "--a", "1", "--A", "2", "--alpha", "0"]);
    assert_eq!(code(&out), 0);
    let v = stdout_json(&out);
    assert_eq!(v["gate"]["verdict"], "balance-violated");
    assert!((v["gate"]["balance"].as_f64().unwrap() - 0.125).abs() < 1e-9);
    assert_eq!(v["manifest"]["command"], "gate");
}

#[test]
fn invalid_input_exits_two() {
    assert_eq!(code(&run(&with(&["gate"], &["--spec", "cubic", "--a", "1", "--A", "1", "--alpha", "-1"]))), 2);
    assert_eq!(code(&run(&["gate", "--spec", "cubic", "--a", "2", "--A", "1", "--alpha", "0"])), 2);
    assert_eq!(code(&run(&["frobnicate"])), 2);
    assert_eq!(code(&run(&with(&["gate", "--spec", "/nonexistent/spec.json"], &CUBIC[2..]))), 2);
    assert_eq!(code(&run(&with(&["classify"], &with(&CUBIC, &["--sweep", "1:2"])))), 2);
    assert_eq!(code(&run(&["counterexample", "--k", "2", "--m", "1"])), 2);
    let out = bin().args(with(&["classify"], &with(&CUBIC, &["--sweep", "0:1:3"]))).env("PUCCI_PROFILE_THREADS", "zero").output().unwrap();
    assert_eq!(code(&out), 2);
}

#[test]
fn classify_at_threshold_is_heteroclinic() {
    let out = run(&with(&["classify"], &with(&CUBIC, &["--delta", "0.7071067811865476"])));
    assert_eq!(code(&out), 0);
    let v = stdout_json(&out);
    assert_eq!(v["results"][0]["result"]["regime"], "heteroclinic");
    assert_eq!(v["results"][0]["result"]["consistent"], true);
    // Eight digits are within a looser match tolerance only.
    let short = with(&["classify"], &with(&CUBIC, &["--delta", "0.70710678"]));
    let v = stdout_json(&run(&short));
    assert_eq!(v["results"][0]["result"]["regime"], "oscillating");
    let v = stdout_json(&run(&with(&short, &["--tol-match", "1e-8"])));
    assert_eq!(v["results"][0]["result"]["regime"], "heteroclinic");
}

fn sweep_csv(dir: &Path, name: &str, threads: &str) -> Vec<u8> {
    let out_path = dir.join(name);
    let out = bin()
        .args(with(&["classify"], &with(&CUBIC, &["--sweep", "-1.5:1.5:13", "--out", out_path.to_str().unwrap()])))
        .env("PUCCI_PROFILE_THREADS", threads)
        .output()
        .unwrap();
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.join(format!("{name}.manifest.json")).exists());
    assert!(dir.join(format!("{name}.json")).exists());
    fs::read(dir.join(format!("{name}.csv"))).unwrap()
}

#[test]
fn sweep_partition_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let first = sweep_csv(dir.path(), "a", "1");
    let second = sweep_csv(dir.path(), "b", "3");
    assert_eq!(first, second);
    let text = String::from_utf8(first).unwrap();
    let rows: Vec<Vec<&str>> = text.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 13);
    let delta1 = 0.5f64.sqrt();
    for row in &rows {
        let d: f64 = row[0].parse().unwrap();
        let expected = if d > delta1 {
            "unbounded-increasing"
        } else if d < -delta1 {
            "unbounded-decreasing"
        } else {
            "oscillating"
        };
        assert_eq!(row[1], expected, "delta {d}");
        if d == 0.0 {
            // The equilibrium u ≡ 0 has a zero-width envelope.
            assert_eq!(row[2].parse::<f64>().unwrap(), 0.0);
            assert_eq!(row[3].parse::<f64>().unwrap(), 0.0);
        }
    }
}

#[test]
fn empty_sweep_writes_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("empty");
    let out = run(&with(&["classify"], &with(&CUBIC, &["--sweep", "0:1:0", "--out", out_path.to_str().unwrap()])));
    assert_eq!(code(&out), 0);
    let csv = fs::read_to_string(dir.path().join("empty.csv")).unwrap();
    assert_eq!(csv, "delta,regime,theta_minus,theta_plus,limit\n");
}

#[test]
fn profile_and_trajectory_exports() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("tanh.csv");
    let out = run(&with(&["profile"], &with(&CUBIC, &["--out", p.to_str().unwrap()])));
    assert_eq!(code(&out), 0);
    let csv = fs::read_to_string(&p).unwrap();
    assert!(csv.starts_with("x,u,du,Y,E\n"));
    for line in csv.lines().skip(1) {
        let cols: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
        assert!((cols[1] - (cols[0] / 2f64.sqrt()).tanh()).abs() < 1e-8, "{line}");
    }
    let json: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("tanh.json")).unwrap()).unwrap();
    assert_eq!(json["u"].as_array().unwrap().len(), 2001);
    let manifest: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("tanh.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["inputs"]["spec"]["kind"], "cubic");

    let t = dir.path().join("sin");
    let out = run(&["profile", "--spec", "cubic", "--a", "1", "--A", "1", "--alpha", "2", "--delta", "1", "--xmax", "3", "--out", t.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let csv = fs::read_to_string(dir.path().join("sin.csv")).unwrap();
    assert!(csv.lines().count() > 10);
}

#[test]
fn profile_without_connection_is_numeric_failure() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("none");
    let out = run(&["profile", "--spec", "cubic", "--a", "1", "--A", "2", "--alpha", "0", "--out", p.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
}

#[test]
fn pde_run_writes_field_sidecar_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("strip.json");
    fs::write(
        &config,
        r#"{ "grid": { "L": 5.0, "W": 1.0, "n1": 26, "n2": 6 },
             "op": { "op": "pucci+", "a": 1.0, "A": 1.0 },
             "alpha": 0.0, "spec": { "kind": "cubic" },
             "boundary": "profile-trace", "init": "profile+perturbation",
             "tol": 1e-8, "max_steps": 200000 }"#,
    )
    .unwrap();
    let out_dir = dir.path().join("run");
    let out = run(&["pde-run", "--config", config.to_str().unwrap(), "--out", out_dir.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(out_dir.join("field.csv")).unwrap();
    assert!(csv.starts_with("i,j,x1,x2,u\n"));
    assert_eq!(csv.lines().count(), 26 * 6 + 1);
    let sidecar: Value = serde_json::from_str(&fs::read_to_string(out_dir.join("field.json")).unwrap()).unwrap();
    assert_eq!(sidecar["solver"]["converged"], true);
    assert!(sidecar["diagnostics"]["spread"].as_f64().unwrap() < 1e-6);
    assert_eq!(sidecar["solver"]["grad_floor"], 1e-8);
    assert!(out_dir.join("manifest.json").exists());

    // Restart from the written field: already converged.
    let restart = dir.path().join("restart.json");
    fs::write(
        &restart,
        format!(
            r#"{{ "grid": {{ "L": 5.0, "W": 1.0, "n1": 26, "n2": 6 }}, "boundary": "profile-trace",
                 "init": "file", "init_file": "{}", "tol": 1e-8 }}"#,
            out_dir.join("field.csv").display()
        ),
    )
    .unwrap();
    let again = dir.path().join("again");
    let out = run(&["pde-run", "--config", restart.to_str().unwrap(), "--out", again.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(stdout_json(&out)["steps"], 0);
}

#[test]
fn pde_run_rejects_bad_config() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.json");
    fs::write(&config, r#"{ "grid": { "L": 5.0, "W": 1.0, "n1": 3, "n2": 6 } }"#).unwrap();
    let out = run(&["pde-run", "--config", config.to_str().unwrap(), "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(code(&out), 2);
}

#[test]
fn counterexample_check_passes() {
    let dir = tempfile::tempdir().unwrap();
    for (k, m) in [("0", "0"), ("0", "1"), ("0", "2")] {
        let out = run(&["counterexample", "--k", k, "--m", m, "--check", "--out", dir.path().to_str().unwrap()]);
        assert_eq!(code(&out), 0);
        let v = stdout_json(&out);
        assert_eq!(v["passed"], true);
        assert!(v["residual"].as_f64().unwrap() <= 1e-12);
        assert_eq!(v["order"]["violations"], 0);
    }
    assert!(fs::read_to_string(dir.path().join("u.csv")).unwrap().starts_with("x1,u\n"));
}
