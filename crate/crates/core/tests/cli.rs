//! End-to-end tests of the command-line binary: exit codes, provenance
//! headers, output formats, and flag overrides.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_soliton-metrology")
}

fn run(args: &[&str]) -> Output {
    Command::new(bin()).args(args).output().unwrap()
}

fn write_cfg(name: &str, text: &str) -> PathBuf {
    let path = std::env::temp_dir().join(format!("cli-test-{}-{name}", std::process::id()));
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn no_arguments_is_a_usage_error() {
    let out = run(&[]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_config_key_is_rejected_with_line_number() {
    let cfg = write_cfg("badkey.cfg", "n_xi = 10\nno_such_key = 1\n");
    let out = Command::new(bin())
        .args(["fisher-pixel-sweep", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 2"), "stderr was: {err}");
    assert!(err.contains("no_such_key"), "stderr was: {err}");
}

#[test]
fn invalid_value_is_a_config_error() {
    let cfg = write_cfg("badval.cfg", "n_xi = -5\n");
    let out = Command::new(bin())
        .args(["fisher-pixel-sweep", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn untrusted_derivative_step_is_a_precision_error() {
    // a finite-difference step of 5 healing lengths cannot resolve the
    // dip; the consistency check must refuse it with exit code 4
    let cfg = write_cfg(
        "badstep.cfg",
        "n_xi = 10\ndx_xi = 0.5\nm_px = 16\nmodel = bogoliubov\nfd_step_xi = 5.0\ntrials = 100\n",
    );
    let out = Command::new(bin())
        .args(["simulate", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(
        out.status.code(),
        Some(4),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn csv_output_carries_provenance_and_ordering() {
    let cfg = write_cfg("sweep.cfg", "n_xi = 10\ndx_xi = 0.25, 0.5, 1.0\nm_px = 32\n");
    let out = Command::new(bin())
        .args(["fisher-pixel-sweep", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("# version = "));
    assert!(text.contains("# config_sha256 = "));
    assert!(text.contains("# seed = "));
    let data: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(data[0], "dx_over_xi,f_xi2_poisson,f_xi2_gauss_diag");
    assert_eq!(data.len(), 4, "expected header + 3 rows, got: {data:?}");
    let mut last_poisson = f64::INFINITY;
    for row in &data[1..] {
        let cells: Vec<f64> = row.split(',').map(|c| c.parse().unwrap()).collect();
        assert!(cells[2] > cells[1], "Gaussian must exceed Poisson: {row}");
        assert!(cells[1] <= last_poisson, "Poisson column must not grow with pixel size");
        last_poisson = cells[1];
    }
}

#[test]
fn json_output_is_well_formed() {
    let cfg = write_cfg("json.cfg", "n_xi = 10\ndx_xi = 0.5\nm_px = 16\n");
    let out = Command::new(bin())
        .args(["fisher-pixel-sweep", "--format", "json", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["metadata"]["config_sha256"].is_string());
    assert_eq!(v["columns"][0], "dx_over_xi");
    assert!(v["rows"][0][1].as_f64().unwrap() > 0.0);
}

#[test]
fn seed_flag_overrides_the_config_file() {
    let cfg = write_cfg("seed.cfg", "n_xi = 10\ndx_xi = 0.5\nm_px = 16\nseed = 3\n");
    let base = Command::new(bin())
        .args(["fisher-pixel-sweep", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    let overridden = Command::new(bin())
        .args(["fisher-pixel-sweep", "--seed", "9", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    let base_text = String::from_utf8(base.stdout).unwrap();
    let over_text = String::from_utf8(overridden.stdout).unwrap();
    assert!(base_text.contains("# seed = 3"));
    assert!(over_text.contains("# seed = 9"));
}

#[test]
fn modes_without_oracle_marks_fd_column_unavailable() {
    let cfg = write_cfg("modes.cfg", "n_xi = 10\nk_max_over_kappa = 5\n");
    let out = Command::new(bin())
        .args(["modes", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let data: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert!(data[0].ends_with("norm_residual,energy_fd"));
    for row in &data[1..] {
        assert!(row.ends_with("NaN"), "expected NaN oracle column: {row}");
    }
}

#[test]
fn identical_invocations_reproduce_files_byte_for_byte() {
    let cfg = write_cfg("repro.cfg", "n_xi = 10\ndx_xi = 1.0\nm_px = 16\ntrials = 500\nseed = 42\n");
    let out_a = std::env::temp_dir().join(format!("cli-repro-a-{}", std::process::id()));
    let out_b = std::env::temp_dir().join(format!("cli-repro-b-{}", std::process::id()));
    for out in [&out_a, &out_b] {
        let status = Command::new(bin())
            .args(["simulate", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(out)
            .status()
            .unwrap();
        assert!(status.success());
    }
    assert_eq!(std::fs::read(&out_a).unwrap(), std::fs::read(&out_b).unwrap());
    std::fs::remove_file(out_a).ok();
    std::fs::remove_file(out_b).ok();
}
