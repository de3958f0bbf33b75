//! End-to-end runs of the `qclab` binary.

use std::fs;
use std::process::{Command, Output};

use tempfile::TempDir;

fn qclab(dir: &TempDir, config: &str, args: &[&str]) -> Output {
    let path = dir.path().join("run.cfg");
    fs::write(&path, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_qclab"))
        .arg("--config")
        .arg(&path)
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn certify_writes_csv_with_header() {
    let dir = TempDir::new().unwrap();
    let o = qclab(&dir, "m_list=1..4\n", &["certify"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# qclab "));
    assert_eq!(lines.next(), Some("m,value,min_residual,bound"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 4);
    for (k, row) in rows.iter().enumerate() {
        let cols: Vec<&str> = row.split(',').collect();
        assert_eq!(cols[0], (k + 1).to_string());
        assert_eq!(cols[1], "-2");
        let r: f64 = cols[2].parse().unwrap();
        let b: f64 = cols[3].parse().unwrap();
        assert!(r >= b);
    }
}

#[test]
fn sweep_writes_output_and_plot_files() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("sweep.csv");
    let o = qclab(
        &dir,
        "model=qce\nN_list=2^6..2^9\n",
        &["--out", out.to_str().unwrap(), "--report", "sweep"],
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(&out).unwrap();
    assert_eq!(csv.lines().nth(1), Some("N,epsilon,residual,model"));
    assert_eq!(csv.lines().count(), 2 + 4);
    assert!(dir.path().join("sweep.dat").exists());
    assert!(stdout(&o).contains("fitted exponent"));
}

#[test]
fn unknown_key_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    let o = qclab(&dir, "modle=qnl\n", &["stencil"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("modle"));
}

#[test]
fn short_chain_is_rejected() {
    let dir = TempDir::new().unwrap();
    let o = qclab(&dir, "model=qnl\nN=8\n", &["stencil"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn energy_of_force_based_model_is_rejected() {
    let dir = TempDir::new().unwrap();
    let o = qclab(&dir, "model=qcf\n", &["energy"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn missing_config_file_is_an_io_error() {
    let o = Command::new(env!("CARGO_BIN_EXE_qclab"))
        .args(["--config", "/nonexistent/qclab.cfg", "stencil"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn exact_stencil_prints_rationals() {
    let dir = TempDir::new().unwrap();
    let o = qclab(&dir, "model=qce\nN=32\nk=1\ns0=1\nF=1.2\n", &["--exact", "stencil"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.contains("interface"));
    assert!(text.lines().skip(2).any(|l| l.contains('/')), "{text}");
}

#[test]
fn moments_of_qnl_vanish_off_the_interface() {
    let dir = TempDir::new().unwrap();
    let o = qclab(&dir, "model=qnl\nN=64\n", &["--exact", "moments"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    for line in text.lines().skip(2) {
        let cols: Vec<&str> = line.split(',').collect();
        assert_eq!(cols[1], "0", "{line}");
        assert_eq!(cols[2], "0", "{line}");
    }
}

#[test]
fn runs_are_deterministic() {
    let dir = TempDir::new().unwrap();
    let a = qclab(&dir, "model=qnl\nN_list=64,128,256\n", &["converge"]);
    let b = qclab(&dir, "model=qnl\nN_list=64,128,256\n", &["converge"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}
