//! End-to-end runs of the `pwlman` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn pwlman(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pwlman"))
        .args(args)
        .env("PWLMAN_THREADS", "1")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn zero_steps_gives_only_the_seed() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let run = pwlman(&["compute", "--preset", "A", "--word", "R", "--steps", "0", "--out", out]);
    assert_eq!(code(&run), 0, "{}", String::from_utf8_lossy(&run.stderr));
    let manifest = json(&dir.path().join("manifest.json"));
    assert_eq!(manifest["counts"], serde_json::json!([1]));
    assert!(dir.path().join("manifold.obj").exists());
}

#[test]
fn compute_writes_requested_formats() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let run = pwlman(&[
        "compute", "--preset", "A", "--word", "R", "--steps", "6", "--formats", "obj,ply,csv,json", "--out", out,
    ]);
    assert_eq!(code(&run), 0, "{}", String::from_utf8_lossy(&run.stderr));
    for name in ["manifold.obj", "manifold.ply", "vertices.csv", "manifold.json", "manifest.json"] {
        assert!(dir.path().join(name).exists(), "missing {name}");
    }
    let manifest = json(&dir.path().join("manifest.json"));
    let counts: Vec<u64> = serde_json::from_value(manifest["counts"].clone()).unwrap();
    assert_eq!(counts, [1, 2, 4, 6, 9, 13, 20]);
    assert!(manifest.get("runtime_seconds").is_none());
    let ply = fs::read_to_string(dir.path().join("manifold.ply")).unwrap();
    assert!(ply.starts_with("ply\n"));
}

#[test]
fn presets_lists_all_three() {
    let run = pwlman(&["presets"]);
    assert_eq!(code(&run), 0);
    let text = String::from_utf8(run.stdout).unwrap();
    for name in ["A", "B", "C"] {
        assert!(text.lines().any(|l| l.starts_with(name)), "{text}");
    }
}

#[test]
fn simulate_with_nothing_kept_writes_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let run = pwlman(&["simulate", "--preset", "A", "--keep", "0", "--out", out]);
    assert_eq!(code(&run), 0, "{}", String::from_utf8_lossy(&run.stderr));
    let csv = fs::read_to_string(dir.path().join("orbit.csv")).unwrap();
    assert_eq!(csv, "step,x0,x1,x2\n");
}

#[test]
fn unknown_preset_is_a_config_error() {
    let run = pwlman(&["compute", "--preset", "Q", "--word", "R"]);
    assert_eq!(code(&run), 2);
}

#[test]
fn bad_word_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let run = pwlman(&["compute", "--preset", "A", "--word", "LRX", "--out", out]);
    assert_eq!(code(&run), 2);
}

#[test]
fn huge_fixed_radius_fails_admissibility() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let run = pwlman(&["compute", "--preset", "A", "--word", "R", "--radius", "1e6", "--out", out]);
    assert_eq!(code(&run), 4, "{}", String::from_utf8_lossy(&run.stderr));
}

#[test]
fn inadmissible_cycle_is_a_math_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    // the LR orbit of set A has both points on the left
    let run = pwlman(&["compute", "--preset", "A", "--word", "LR", "--out", out]);
    assert_eq!(code(&run), 3, "{}", String::from_utf8_lossy(&run.stderr));
}

#[test]
fn escaping_orbit_exits_with_divergence() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let run = pwlman(&[
        "simulate", "--preset", "B", "--tau-l", "1.51", "--near", "L", "--offset", "0.9165", "--transient", "0",
        "--keep", "200", "--out", out,
    ]);
    assert_eq!(code(&run), 5, "{}", String::from_utf8_lossy(&run.stderr));
    assert!(dir.path().join("orbit.csv").exists());
}

#[test]
fn budget_exhaustion_has_its_own_code() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let run = pwlman(&[
        "compute", "--preset", "A", "--word", "R", "--steps", "12", "--max-polytopes", "50", "--out", out,
    ]);
    assert_eq!(code(&run), 6, "{}", String::from_utf8_lossy(&run.stderr));
}

#[test]
fn archives_feed_intersect() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first");
    let run = pwlman(&[
        "compute", "--preset", "C", "--word", "R", "--steps", "5", "--formats", "json",
        "--out", first.to_str().unwrap(),
    ]);
    assert_eq!(code(&run), 0, "{}", String::from_utf8_lossy(&run.stderr));
    let archive = first.join("manifold.json");
    let both = dir.path().join("both");
    let run = pwlman(&[
        "intersect", "--preset", "C", "--first-archive", archive.to_str().unwrap(), "--second", "LLR:stable:5",
        "--out", both.to_str().unwrap(),
    ]);
    assert_eq!(code(&run), 0, "{}", String::from_utf8_lossy(&run.stderr));
    let from_archive = json(&both.join("intersections.json"));

    let grown = dir.path().join("grown");
    let run = pwlman(&[
        "intersect", "--preset", "C", "--first", "R:unstable:5", "--second", "LLR:stable:5",
        "--out", grown.to_str().unwrap(),
    ]);
    assert_eq!(code(&run), 0);
    let grown = json(&grown.join("intersections.json"));
    assert_eq!(from_archive["intersections"], grown["intersections"]);
    assert_eq!(from_archive["first"]["counts"], grown["first"]["counts"]);
    assert!(from_archive["segments"].as_u64().unwrap() > 0);
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.json");
    let out = dir.path().join("out");
    fs::write(
        &config,
        format!(
            r#"{{"map": {{"preset": "A"}}, "word": "R", "steps": 9, "formats": ["json"], "out": {:?}}}"#,
            out.to_str().unwrap()
        ),
    )
    .unwrap();
    let run = pwlman(&["compute", "--config", config.to_str().unwrap(), "--steps", "3"]);
    assert_eq!(code(&run), 0, "{}", String::from_utf8_lossy(&run.stderr));
    let manifest = json(&out.join("manifest.json"));
    assert_eq!(manifest["steps"], 3);
    assert_eq!(manifest["counts"].as_array().unwrap().len(), 4);
    assert!(!out.join("manifold.obj").exists());
}

#[test]
fn config_with_unknown_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.json");
    fs::write(&config, r#"{"map": {"preset": "A"}, "wrod": "R"}"#).unwrap();
    let run = pwlman(&["compute", "--config", config.to_str().unwrap()]);
    assert_eq!(code(&run), 2);
}

#[test]
fn probe_reports_bounded_growth() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let run = pwlman(&[
        "compute", "--preset", "B", "--tau-l", "1.5", "--word", "L", "--branch", "right", "--steps", "20", "--probe",
        "--out", out,
    ]);
    assert_eq!(code(&run), 0, "{}", String::from_utf8_lossy(&run.stderr));
    let manifest = json(&dir.path().join("manifest.json"));
    assert!(manifest["probe"]["escaped_at"].is_null());
    assert!(!dir.path().join("manifold.obj").exists());
}
