use std::path::Path;
use std::process::Command;

use modadapt::cli_io::{dump_name, preset_test1, read_field_dump, run};
use modadapt::dg::Space1D;
use modadapt::mesh::{Boundary, Mesh1D};
use modadapt::solver::{Scheme, Scheme1D};
use sha2::{Digest, Sha256};

fn run_binary(out: &Path, reference: &str) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_modadapt"))
        .args(["run", "test1", "--steps", "10", "--reference", reference])
        .env("MODADAPT_OUT", out)
        .env("RUST_LOG", "warn")
        .output()
        .unwrap()
}

fn csv_rows(dir: &Path) -> Vec<Vec<String>> {
    let mut reader = csv::Reader::from_path(dir.join("estimators.csv")).unwrap();
    let header: Vec<String> = reader.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(
        header,
        ["t", "E_M_inc", "E_D_inc", "cum_E_M", "cum_E_D", "total_bound", "error_L2", "active_measure"]
    );
    reader
        .records()
        .map(|r| r.unwrap().iter().map(String::from).collect())
        .collect()
}

#[test]
fn ten_steps_without_reference() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_binary(dir.path(), "off");
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = csv_rows(dir.path());
    assert_eq!(rows.len(), 10);
    let t: Vec<f64> = rows.iter().map(|r| r[0].parse().unwrap()).collect();
    assert!(t.windows(2).all(|w| w[1] > w[0]));
    assert!(rows.iter().all(|r| r[6].is_empty()));
    let bound: Vec<f64> = rows.iter().map(|r| r[5].parse().unwrap()).collect();
    assert!(bound.windows(2).all(|w| w[1] >= w[0]));
    assert!(dir.path().join("summary.txt").exists());
}

#[test]
fn reference_fills_error_column() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_binary(dir.path(), "on");
    assert!(out.status.success());
    let rows = csv_rows(dir.path());
    assert!(rows.iter().all(|r| r[6].parse::<f64>().unwrap() >= 0.0));
}

#[test]
fn repeated_runs_are_bitwise_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert!(run_binary(a.path(), "off").status.success());
    assert!(run_binary(b.path(), "off").status.success());
    let hash = |d: &Path| Sha256::digest(std::fs::read(d.join("estimators.csv")).unwrap());
    assert_eq!(hash(a.path()), hash(b.path()));
}

#[test]
fn unknown_target_fails() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_modadapt"))
        .args(["run", "no_such_preset_or_file"])
        .env("MODADAPT_OUT", dir.path())
        .output()
        .unwrap();
    assert!(!out.status.success());
}

#[test]
fn config_file_overrides_preset() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("small.toml");
    std::fs::write(&cfg, "cells = 50\nt_final = 0.002\nreference = false\nsnapshots = [0.0]\n").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_modadapt"))
        .args(["run", cfg.to_str().unwrap(), "--out", dir.path().join("o").to_str().unwrap()])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(csv_rows(&dir.path().join("o")).len(), 20);
}

#[test]
fn dump_round_trips_to_nodal_field() {
    let mut cfg = preset_test1();
    cfg.cells = 40;
    cfg.t_final = 0.01;
    cfg.reference = false;
    cfg.snapshots = vec![0.0];
    let dir = tempfile::tempdir().unwrap();
    run(&cfg, dir.path()).unwrap();
    let dump = read_field_dump(&dir.path().join(dump_name(0.0))).unwrap();
    assert_eq!(dump.t, 0.0);
    let mesh = Mesh1D::uniform(cfg.domain_min, cfg.domain_max, cfg.cells, Boundary::Dirichlet).unwrap();
    let scheme = Scheme1D::new(mesh.clone(), cfg.solver_config().unwrap()).unwrap();
    let expected = scheme.initial_field().unwrap();
    let space = Space1D::new(mesh, cfg.degree);
    let field = dump.to_field_1d(&space).unwrap();
    let diff = field.axpy(-1.0, &expected).max_abs();
    assert!(diff <= 1e-12, "{diff}");
}
