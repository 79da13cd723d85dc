use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn lrperc(dir: &Path, config: &str, args: &[&str]) -> Output {
    let cfg = dir.join("run.ini");
    fs::write(&cfg, config).unwrap();
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_lrperc"));
    cmd.args(args).arg("--config").arg(&cfg).arg("--out").arg(dir.join("out")).env_remove("PERC_SEED");
    cmd.output().unwrap()
}

/// Data rows of a CSV, comment lines and header dropped.
fn rows(path: &Path) -> Vec<Vec<String>> {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    lines.next().expect("header");
    lines.map(|l| l.split(',').map(String::from).collect()).collect()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn unknown_key_is_rejected_with_line() {
    let dir = TempDir::new().unwrap();
    let o = lrperc(dir.path(), "[phase]\nd = 1\nalpha_grid = 1\nbeta_grid = 1\nbogus = 3\n", &["phase"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stderr(&o).contains("line 5"), "{}", stderr(&o));
}

#[test]
fn malformed_config_is_rejected() {
    let dir = TempDir::new().unwrap();
    let o = lrperc(dir.path(), "[phase\nd = 1\n", &["phase"]);
    assert_eq!(o.status.code(), Some(2));
    let o = lrperc(dir.path(), "[phase]\nd = one\nalpha_grid = 1\nbeta_grid = 1\n", &["phase"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn phase_rows_and_empty_grid() {
    let dir = TempDir::new().unwrap();
    let o = lrperc(dir.path(), "[phase]\nd = 1\nalpha_grid = 1.5, 3\nbeta_grid = 1\n", &["phase"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = rows(&dir.path().join("out/phase.csv"));
    assert_eq!(r.len(), 2);
    assert_eq!(r[0][3], "LambdaCZero");
    assert_eq!(r[1][3], "LambdaCInfinite");
    assert!(dir.path().join("out/manifest.json").exists());

    let o = lrperc(dir.path(), "[phase]\nd = 1\nalpha_grid =\nbeta_grid = 1\n", &["phase"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(rows(&dir.path().join("out/phase.csv")).is_empty());
}

#[test]
fn seed_sources_and_override() {
    let dir = TempDir::new().unwrap();
    let cfg = "[model]\nd = 1\nalpha = 1.5\nbeta = 2\nlambda = 1\n[degree]\nside = 300\n[run]\nseed = 5\n";
    let read = |d: &Path| fs::read_to_string(d.join("out/degree.csv")).unwrap();
    assert_eq!(lrperc(dir.path(), cfg, &["degree"]).status.code(), Some(0));
    let from_file = read(dir.path());
    assert!(from_file.contains("seed=5"));
    assert_eq!(lrperc(dir.path(), cfg, &["degree", "--seed", "5"]).status.code(), Some(0));
    assert_eq!(read(dir.path()), from_file);

    let cfg_path = dir.path().join("run.ini");
    let o = Command::new(env!("CARGO_BIN_EXE_lrperc"))
        .args(["degree", "--seed", "5", "--config"])
        .arg(&cfg_path)
        .arg("--out")
        .arg(dir.path().join("out"))
        .env("PERC_SEED", "9")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let env_run = read(dir.path());
    assert!(env_run.contains("seed=9"));
    assert_ne!(env_run, from_file);
}

#[test]
fn degree_at_zero_intensity() {
    let dir = TempDir::new().unwrap();
    let cfg = "[model]\nd = 2\nalpha = 3\nbeta = 2\nlambda = 0\n[degree]\nside = 12\n";
    let o = lrperc(dir.path(), cfg, &["degree"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = rows(&dir.path().join("out/degree.csv"));
    assert_eq!(r.len(), 144);
    assert!(r.iter().all(|row| row[1] == "0"));
}

#[test]
fn renorm_zero_intensity_and_budget() {
    let dir = TempDir::new().unwrap();
    let cfg = "[model]\nd = 1\nalpha = 3\nbeta = 1.5\nlambda = 0\n[renorm]\na0 = 100\nreplicates = 50\n";
    let o = lrperc(dir.path(), cfg, &["renorm"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = rows(&dir.path().join("out/renorm.csv"));
    assert_eq!(r[0][3].parse::<f64>().unwrap(), 0.0);

    let cfg = "[model]\nd = 1\nalpha = 3\nbeta = 1.5\nlambda = 1\n[renorm]\na0 = 100\nreplicates = 50\npair_budget = 10\n";
    let o = lrperc(dir.path(), cfg, &["renorm"]);
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
}

#[test]
fn lambda_c_refuses_analytic_classes() {
    let dir = TempDir::new().unwrap();
    for alpha in ["1", "3"] {
        let cfg = format!("[model]\nd = 1\nalpha = {alpha}\nbeta = 1\n[lambda_c]\nradii = 16\n");
        let o = lrperc(dir.path(), &cfg, &["lambda-c"]);
        assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    }
}

#[test]
fn distance_linear_has_no_theory_value() {
    let dir = TempDir::new().unwrap();
    let cfg = "[model]\nd = 1\nalpha = 3\nbeta = 2\nlambda = 3\n[distance]\nradii = 8, 16\nreplicates = 5\n";
    let o = lrperc(dir.path(), cfg, &["distance"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = rows(&dir.path().join("out/distance.csv"));
    assert_eq!(r.len(), 2);
    assert!(r.iter().all(|row| row[0] == "Linear" && row[6] == "none"));
}

#[test]
fn theta_csv_is_monotone() {
    let dir = TempDir::new().unwrap();
    let cfg = "[model]\nd = 1\nalpha = 1.5\nbeta = 2\n[theta]\nlambda_grid = 0, 0.1, 0.2, 0.4, 0.8\nbox_radius = 32\nreplicates = 40\n";
    let o = lrperc(dir.path(), cfg, &["theta"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let est: Vec<f64> = rows(&dir.path().join("out/theta.csv")).iter().map(|r| r[1].parse().unwrap()).collect();
    assert_eq!(est.len(), 5);
    assert_eq!(est[0], 0.0);
    assert!(est.windows(2).all(|w| w[0] <= w[1]), "{est:?}");
}

#[test]
fn oracle_check_passes() {
    let dir = TempDir::new().unwrap();
    let o = lrperc(dir.path(), "[oracle]\nreplicates = 20000\n", &["oracle-check"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = rows(&dir.path().join("out/oracle.csv"));
    let cases: std::collections::BTreeSet<&str> = r.iter().map(|row| row[0].as_str()).collect();
    assert_eq!(cases.len(), 12);
    assert!(r.iter().all(|row| row[5].parse::<f64>().unwrap().abs() <= 3.0));
}
