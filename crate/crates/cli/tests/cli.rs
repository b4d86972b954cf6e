// Copyright 2026 Kerrnet Contributors
// SPDX-License-Identifier: Apache-2.0

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const SMALL: &str = r#"
n = 14
d = 8
eps = { start = 0.0, stop = 6.0, step = 2.0 }
d_grid = [4, 8, 12]
gate = "not"
trajectories = 3
samples_per_unit = 4
seed = 5
"#;

fn kerrnet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kerrnet")).args(args).output().expect("binary runs")
}

fn run_ok(args: &[&str]) {
    let out = kerrnet(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
}

fn write_config(dir: &Path, extra: &str) -> String {
    let path = dir.join("run.toml");
    fs::write(&path, format!("{SMALL}{extra}")).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn validate_passes_and_detects_an_injected_fault() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    run_ok(&["validate", "--out", out]);
    assert!(dir.path().join("validation.json").exists());
    let faulty = kerrnet(&["validate", "--out", out, "--inject-fault", "1e-6"]);
    assert!(!faulty.status.success());
}

#[test]
fn reduced_sweep_reads_a_saved_basis() {
    let dir = tempfile::tempdir().unwrap();
    let reduce_out = dir.path().join("reduce");
    let cfg = write_config(dir.path(), "");
    run_ok(&["reduce", "--config", &cfg, "--out", reduce_out.to_str().unwrap()]);
    assert!(reduce_out.join("basis.txt").exists());

    let cfg = write_config(dir.path(), "basis = \"reduce/basis.txt\"\n");
    let sweep_out = dir.path().join("sweep");
    run_ok(&["sweep-steady", "--config", &cfg, "--out", sweep_out.to_str().unwrap()]);
    let csv = fs::read_to_string(sweep_out.join("steady.csv")).unwrap();
    assert!(csv.lines().any(|l| l.contains("reduced")));
    assert_eq!(csv.lines().count(), 1 + 4 * 2 * 2);
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "");
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        run_ok(&["gate-sim", "--config", &cfg, "--out", out.to_str().unwrap()]);
    }
    for name in ["gate_not.csv", "manifest.toml"] {
        assert_eq!(fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap(), "{name} differs");
    }
}

#[test]
fn invalid_configs_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let unknown = write_config(dir.path(), "colour = \"blue\"\n");
    assert!(!kerrnet(&["reduce", "--config", &unknown, "--out", out.to_str().unwrap()]).status.success());
    let path = dir.path().join("bad.toml");
    fs::write(&path, "n = 10\nd = 20\n").unwrap();
    let oversized = kerrnet(&["reduce", "--config", path.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(!oversized.status.success());
    assert!(!kerrnet(&["reduce", "--config", "/nonexistent/run.toml"]).status.success());
}
