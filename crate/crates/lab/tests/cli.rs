//! End-to-end behaviour of the `arrival-lab` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use arrival_lab::scenario::json_schema;
use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_arrival-lab"))
}

fn repo() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn run(scenario: &Path, out: &Path, extra: &[&str]) -> Output {
    bin().arg("run").arg("--scenario").arg(scenario).arg("--out-dir").arg(out).args(extra).output().unwrap()
}

fn validate(scenario: &Path) -> Value {
    let out = bin().arg("validate").arg("--scenario").arg(scenario).output().unwrap();
    assert!(out.status.success());
    serde_json::from_slice(&out.stdout).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const SMALL_HIST: &str = r#"{
  "schema_version": 1,
  "seed": 9,
  "task": {
    "command": "arrival-hist",
    "field": { "type": "gaussian-packet", "center": [0, 0, 0], "sigma": 1.0, "momentum": [0, 0, 2.0] },
    "surface": { "type": "plane-z", "z": 3.0 },
    "n": 600,
    "t_max": 5.0,
    "bins": 20,
    "ideal": false
  }
}"#;

#[test]
fn published_schema_matches_the_types() {
    let path = repo().join("docs/scenario-schema.json");
    let generated = serde_json::to_string_pretty(&json_schema()).unwrap() + "\n";
    if std::env::var_os("UPDATE_SCHEMA").is_some() {
        std::fs::write(&path, &generated).unwrap();
    }
    let published = std::fs::read_to_string(&path).unwrap();
    assert_eq!(published, generated, "regenerate with UPDATE_SCHEMA=1 cargo test -p arrival-lab --test cli");
}

#[test]
fn example_scenarios_are_valid() {
    let mut seen = 0;
    for entry in std::fs::read_dir(repo().join("scenarios")).unwrap() {
        let path = entry.unwrap().path();
        let report = validate(&path);
        assert_eq!(report["valid"], true, "{}: {report}", path.display());
        assert!(report["violations"].as_array().unwrap().is_empty());
        seen += 1;
    }
    assert!(seen >= 10);
}

#[test]
fn empty_scenario_is_a_schema_error() {
    let dir = tempfile::tempdir().unwrap();
    let s = write(dir.path(), "empty.json", "");
    let o = run(&s, &dir.path().join("out"), &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("schema error"));
}

#[test]
fn schema_errors_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let s = write(dir.path(), "bad.json", &SMALL_HIST.replace("\"bins\"", "\"binz\""));
    let o = run(&s, &dir.path().join("out"), &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("binz"), "{}", stderr(&o));
    let s = write(dir.path(), "version.json", &SMALL_HIST.replace("\"schema_version\": 1", "\"schema_version\": 2"));
    let o = run(&s, &dir.path().join("out"), &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("schema_version"));
}

#[test]
fn precondition_and_numeric_failures_have_distinct_codes() {
    let dir = tempfile::tempdir().unwrap();
    let overlap = r#"{ "schema_version": 1, "task": { "command": "which-path", "t": 1.0,
        "field": { "type": "double-slit", "separation": 1.0,
                   "packet": { "center": [0, 0, 0], "sigma": 0.5, "momentum": [0, 0, 1] } },
        "method": { "type": "quadrature" } } }"#;
    let o = run(&write(dir.path(), "overlap.json", overlap), &dir.path().join("a"), &[]);
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
    let starved = r#"{ "schema_version": 1, "integrator": { "max_steps": 2 }, "task": { "command": "trajectories",
        "field": { "type": "gaussian-packet", "center": [0, 0, 0], "sigma": 1.0, "momentum": [0, 0, 1] },
        "starts": [[0.1, 0.0, 0.2]], "t1": 5.0 } }"#;
    let o = run(&write(dir.path(), "starved.json", starved), &dir.path().join("b"), &[]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stderr(&o).contains("task.starts[0]"));
}

#[test]
fn spin_vector_violation_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let s = r#"{ "schema_version": 1, "task": { "command": "arrival-hist",
        "field": { "type": "waveguide", "spin": [0.5, 0.0, 0.0] },
        "surface": { "type": "disk", "z": 2.0, "radius": 4.0 }, "n": 10, "t_max": 4.0 } }"#;
    let path = write(dir.path(), "spin.json", s);
    let report = validate(&path);
    assert_eq!(report["valid"], false);
    let v = report["violations"].to_string();
    assert!(v.contains("SpinVector") && v.contains("task.field.spin"), "{v}");
    let o = run(&path, &dir.path().join("out"), &[]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn huge_ensembles_draw_a_cost_warning() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "huge.json", &SMALL_HIST.replace("\"n\": 600", "\"n\": 1000000000"));
    let report = validate(&path);
    assert_eq!(report["valid"], true);
    assert_eq!(report["cost"]["trajectories"], 1_000_000_000u64);
    assert!(report["warnings"].to_string().contains("cost"));
    let small = validate(&write(dir.path(), "small.json", SMALL_HIST));
    assert!(small["warnings"].as_array().unwrap().is_empty());
}

#[test]
fn runs_are_byte_reproducible_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let s = write(dir.path(), "hist.json", SMALL_HIST);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert!(run(&s, &a, &["--threads", "1"]).status.success());
    assert!(run(&s, &b, &["--threads", "3"]).status.success());
    for f in ["histogram.csv", "arrival_summary.json"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
    let c = dir.path().join("c");
    assert!(run(&s, &c, &["--seed-override", "10"]).status.success());
    assert_ne!(std::fs::read(a.join("histogram.csv")).unwrap(), std::fs::read(c.join("histogram.csv")).unwrap());
    let manifest: Value = serde_json::from_slice(&std::fs::read(c.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 10);
}

#[test]
fn manifest_lists_every_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let scenario = repo().join("scenarios/backflow-map.json");
    assert!(run(&scenario, &out, &["--validate"]).status.success());
    let manifest: Value = serde_json::from_slice(&std::fs::read(out.join("manifest.json")).unwrap()).unwrap();
    let mut listed: Vec<String> =
        manifest["outputs"].as_array().unwrap().iter().map(|o| o["file"].as_str().unwrap().to_owned()).collect();
    listed.push("manifest.json".into());
    listed.sort();
    let mut present: Vec<String> =
        std::fs::read_dir(&out).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    present.sort();
    assert_eq!(listed, present);
    assert_eq!(manifest["schema_version"], 1);
    assert_eq!(manifest["scenario_sha256"].as_str().unwrap().len(), 64);
    for o in manifest["outputs"].as_array().unwrap() {
        let bytes = std::fs::read(out.join(o["file"].as_str().unwrap())).unwrap();
        assert_eq!(o["bytes"], bytes.len());
    }
    let header = std::fs::read_to_string(out.join("map.csv")).unwrap();
    assert!(header.starts_with("x,z,re_psi,j_x,j_z\n"));
}

#[test]
fn pml_scenario_writes_the_potential_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    assert!(run(&repo().join("scenarios/pml.json"), &out, &[]).status.success());
    let csv = std::fs::read_to_string(out.join("pml.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "z,re_v_fwd,re_v_bwd,im_v,density_fwd,density_bwd");
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|c| c.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 601);
    assert!(rows.iter().all(|r| r[3] <= 0.0));
    let mantissa_digits = |c: &str| c.split('e').next().unwrap().chars().filter(char::is_ascii_digit).count();
    assert!(csv.lines().nth(1).unwrap().split(',').all(|c| mantissa_digits(c) == 17));
}
