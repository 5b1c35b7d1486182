use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use emwaveholtz::io::read_raw_component;
use emwaveholtz_cli::config::RunConfig;
use emwaveholtz_cli::output::sha256_hex;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn emwh(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_emwh")).args(args).output().expect("spawn emwh")
}

fn write_config(dir: &Path, text: &str) -> String {
    let p = dir.join("case.toml");
    fs::write(&p, text).unwrap();
    p.display().to_string()
}

fn summary_value(dir: &Path, key: &str) -> String {
    let s = fs::read_to_string(dir.join("summary.txt")).unwrap();
    s.lines()
        .find_map(|l| l.strip_prefix(&format!("{key}: ")))
        .unwrap_or_else(|| panic!("{key} missing from summary"))
        .to_string()
}

const SMALL: &str = r#"
dimension = 2

[domain]
lower = [-1.0, -1.0]
upper = [1.0, 1.0]
cells = [16, 16]

[boundary]
all = "pec"

[source]
kind = "gaussian"
sigma = 36.0

[solve]
frequency = 3.5
tol = 1e-8
"#;

#[test]
fn pec_gaussian_run_writes_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = configs().join("pec_gaussian.toml");
    let out = emwh(&["run", "--config", cfg.to_str().unwrap(), "--out", tmp.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(summary_value(tmp.path(), "iterations"), "11");
    assert_eq!(summary_value(tmp.path(), "cells"), "52x52");
    for f in ["im_e_w12p5000.vtk", "re_e_w12p5000.vtk", "im_h_w12p5000.bin", "residuals.csv", "provenance.toml"] {
        assert!(tmp.path().join(f).exists(), "{f} missing");
    }
    let csv = fs::read_to_string(tmp.path().join("residuals.csv")).unwrap();
    assert!(csv.starts_with("iteration,relative_residual,wave_solves,seconds"));
    assert_eq!(csv.lines().count(), 1 + 12);
}

#[test]
fn snapshot_reparses_to_the_same_config() {
    let tmp = tempfile::tempdir().unwrap();
    let path = write_config(tmp.path(), SMALL);
    let out_dir = tmp.path().join("out");
    let out = emwh(&["run", "--config", &path, "--out", out_dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let snap = fs::read_to_string(out_dir.join("config.snapshot.toml")).unwrap();
    let reparsed = RunConfig::parse(&snap).unwrap();
    assert_eq!(reparsed.to_toml(), snap);
    let prov = fs::read_to_string(out_dir.join("provenance.toml")).unwrap();
    assert!(prov.contains(&sha256_hex(snap.as_bytes())));
    assert_eq!(summary_value(&out_dir, "config_sha256"), sha256_hex(snap.as_bytes()));
}

#[test]
fn incommensurate_frequencies_are_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let text = SMALL.replace("frequency = 3.5", "frequencies = [5.5, 7.1]");
    let path = write_config(tmp.path(), &text);
    let out = emwh(&["multifreq", "--config", &path, "--out", tmp.path().join("o").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("config line"), "{err}");
    assert!(err.contains("common base frequency"), "{err}");
}

#[test]
fn cg_on_open_boundary_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let text = SMALL.replace("all = \"pec\"", "all = \"open\"").replace("tol = 1e-8", "tol = 1e-8\nsolver = \"cg\"");
    let path = write_config(tmp.path(), &text);
    let out = emwh(&["run", "--config", &path, "--out", tmp.path().join("o").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_keys_report_their_line() {
    let tmp = tempfile::tempdir().unwrap();
    let text = SMALL.replace("tol = 1e-8", "tol = 1e-8\ntolerance = 3");
    let path = write_config(tmp.path(), &text);
    let out = emwh(&["run", "--config", &path]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    let line = text.lines().position(|l| l.starts_with("tolerance")).unwrap() + 1;
    assert!(err.contains(&format!("config line {line}")), "{err}");
}

#[test]
fn unconverged_run_exits_3_and_keeps_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let path = write_config(tmp.path(), SMALL);
    let o = tmp.path().join("o");
    let out = emwh(&["run", "--config", &path, "--out", o.to_str().unwrap(), "--max-iters", "1", "--tol", "1e-14"]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(summary_value(&o, "converged"), "false");
    assert!(o.join("residuals.csv").exists());
}

#[test]
fn empty_sweep_writes_a_header_only_csv() {
    let tmp = tempfile::tempdir().unwrap();
    let path = write_config(tmp.path(), &format!("{SMALL}\n[sweep]\nfrequencies = []\n"));
    let o = tmp.path().join("o");
    let out = emwh(&["sweep", "--config", &path, "--out", o.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(o.join("sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1);
    assert_eq!(summary_value(&o, "entries"), "0");
}

#[test]
fn sweep_records_every_entry() {
    let tmp = tempfile::tempdir().unwrap();
    let text = SMALL.replace("cells = [16, 16]", "cells_per_omega = 4");
    let path = write_config(tmp.path(), &format!("{text}\n[sweep]\nk_min = 2\nk_max = 6\nk_step = 2\nworkers = 2\n"));
    let o = tmp.path().join("o");
    let out = emwh(&["sweep", "--config", &path, "--out", o.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(o.join("sweep.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 3);
    assert!(rows[0].starts_with("2.5,"));
    assert!(rows.iter().all(|r| r.split(',').nth(3) == Some("true")));
}

#[test]
fn normalized_slit_field_peaks_at_one() {
    let tmp = tempfile::tempdir().unwrap();
    // The shipped slit case at a coarser wavelength to keep the test short.
    let text = fs::read_to_string(configs().join("slit.toml"))
        .unwrap()
        .replace("wavelength = 0.25", "wavelength = 0.5")
        .replace("cells_per_omega = 8", "cells_per_omega = 6");
    let path = write_config(tmp.path(), &text);
    let o = tmp.path().join("o");
    let out = emwh(&["run", "--config", &path, "--out", o.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let omega = 2.0 * std::f64::consts::PI / 0.5;
    let tag = emwaveholtz_cli::output::freq_tag(omega);
    let hdr = fs::read_to_string(o.join(format!("normalized_{tag}.hdr"))).unwrap();
    let line = hdr.lines().find(|l| l.starts_with("component")).unwrap();
    let inner = &line[line.find("dims [").unwrap() + 6..];
    let dims: Vec<usize> = inner[..inner.find(']').unwrap()].split(", ").map(|s| s.parse().unwrap()).collect();
    let len: usize = dims.iter().product();
    let v = read_raw_component(&o.join(format!("normalized_{tag}.bin")), 0, len).unwrap();
    let peak = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    assert!((peak - 1.0).abs() < 1e-12, "peak {peak}");
    // Ez vanishes inside the screen.
    let n = dims[1];
    let cells = dims[0] - 1;
    let h = 2.0 / cells as f64;
    let i = ((-0.5 + 1.0) / h).round() as usize;
    let j = ((0.1 + 1.0) / h).round() as usize;
    assert_eq!(v[i * n + j], 0.0);
}

#[test]
fn verify_spd_suite_passes() {
    let tmp = tempfile::tempdir().unwrap();
    let out = emwh(&["verify", "--suite", "spd", "--out", tmp.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.starts_with("PASS spd"), "{text}");
    let csv = fs::read_to_string(tmp.path().join("eigenvalues.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 23 * 23);
}
