//! End-to-end checks of the `bslab` binary: exit codes, artifact layout,
//! and byte-stable results.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bslab() -> Command {
    Command::new(env!("CARGO_BIN_EXE_bslab"))
}

fn temp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("bslab-cli-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

const FREE_RUN: &str = r#"
kind = "simulate"

[simulate]
mass = 1.0
mu0 = 1.0
s = 0.5
dt = 0.05
t_end = 0.5
integrator = "exp-midpoint"
coupling = 0.0

[simulate.grid]
kind = "radial"
n_r = 64
r_max = 8.0

[simulate.initial]
shape = "radial-gaussian"
amplitude = 0.1
width = 1.0
radial = true
"#;

fn run_to(dir: &Path, config: &Path, out: &str) -> Output {
    bslab()
        .arg("run")
        .arg(config)
        .arg("--out")
        .arg(dir.join(out))
        .output()
        .expect("binary runs")
}

#[test]
fn free_run_writes_artifacts_and_exits_zero() {
    let dir = temp_dir("free");
    let config = write_config(&dir, "free.toml", FREE_RUN);
    let out = run_to(&dir, &config, "out");
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for name in ["result.json", "manifest.json", "diagnostics.csv"] {
        assert!(dir.join("out").join(name).exists(), "{name} missing");
    }
    // free flow: constant mass column
    let csv = std::fs::read_to_string(dir.join("out/diagnostics.csv")).unwrap();
    let masses: Vec<f64> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    for m in &masses {
        assert!((m - masses[0]).abs() <= 1e-12 * masses[0]);
    }
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = temp_dir("determinism");
    let config = write_config(&dir, "free.toml", FREE_RUN);
    assert!(run_to(&dir, &config, "a").status.success());
    assert!(run_to(&dir, &config, "b").status.success());
    let a = std::fs::read(dir.join("a/result.json")).unwrap();
    let b = std::fs::read(dir.join("b/result.json")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn validation_error_exits_two_and_names_key() {
    let dir = temp_dir("badmass");
    let config = write_config(&dir, "bad.toml", &FREE_RUN.replace("mass = 1.0", "mass = -1.0"));
    let out = run_to(&dir, &config, "out");
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("mass"), "stderr: {stderr}");

    let config = write_config(&dir, "unknown.toml", &FREE_RUN.replace("mu0 = 1.0", "mu0 = 1.0\ntypo_key = 2"));
    let out = run_to(&dir, &config, "out2");
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("typo_key"));
}

#[test]
fn numerical_abort_exits_three() {
    let dir = temp_dir("blowup");
    let body = FREE_RUN
        .replace("coupling = 0.0", "coupling = 4000.0")
        .replace("dt = 0.05", "dt = 0.5")
        .replace("t_end = 0.5", "t_end = 10.0")
        .replace("amplitude = 0.1", "amplitude = 2.0");
    let config = write_config(&dir, "blowup.toml", &body);
    let out = run_to(&dir, &config, "out");
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("blow-up"));
}

#[test]
fn describe_lists_schemas_and_rejects_bogus() {
    let out = bslab().args(["describe", "estimate-sweep"]).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    for id in [
        "radial-strichartz",
        "l2l6-strichartz",
        "localized-strichartz",
        "cube-square-sum",
        "bilinear",
        "trilinear",
    ] {
        assert!(text.contains(id), "{id} missing from describe output");
    }
    let out = bslab().args(["describe", "simulate"]).output().unwrap();
    let text = String::from_utf8_lossy(&out.stdout);
    for knob in ["mass", "mu0", "integrator", "coupling", "grid"] {
        assert!(text.contains(knob), "{knob} missing");
    }
    let out = bslab().args(["describe", "bogus"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn seed_override_changes_seeded_data() {
    let dir = temp_dir("seed");
    let body = FREE_RUN
        .replace(
            "shape = \"radial-gaussian\"\namplitude = 0.1\nwidth = 1.0\nradial = true",
            "shape = \"annulus-random\"\namplitude = 0.1\nlambda = 2.0\nseed = 7\nradial = true",
        )
        .replace("coupling = 0.0", "coupling = 1.0");
    let config = write_config(&dir, "seeded.toml", &body);
    assert!(run_to(&dir, &config, "a").status.success());
    let out = bslab()
        .arg("run")
        .arg(&config)
        .arg("--out")
        .arg(dir.join("b"))
        .args(["--seed", "8"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let a = std::fs::read(dir.join("a/result.json")).unwrap();
    let b = std::fs::read(dir.join("b/result.json")).unwrap();
    assert_ne!(a, b);
}
