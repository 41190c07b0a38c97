use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use rfmass::harness::ExperimentConfig;

fn rfmass(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rfmass")).args(args).output().unwrap()
}

fn write_config(dir: &Path, blowup_factor: f64) -> String {
    let path = dir.join("exp.toml");
    let text = format!(
        "name = \"cli\"\n[initial]\nkind = \"conformal_bump\"\nn = 3\namplitude = 0.5\nq = 5.0\n\
         [grid]\nnodes = 256\n[flow]\nt_final = 0.02\nrecord_every = 5\nblowup_factor = {blowup_factor:?}\n"
    );
    fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn run_writes_outputs_and_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), 1000.0);
    let out_dir = dir.path().join("out");
    let out = rfmass(&["run", &config, "--output", out_dir.to_str().unwrap(), "--gnuplot-script"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let summary: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(summary["status"], "completed");
    for file in ["series.csv", "summary.json", "final.csv", "final.json", "config.toml", "plot.gp"] {
        assert!(out_dir.join(file).exists(), "{file}");
    }

    let mass = rfmass(&["mass", out_dir.join("final.csv").to_str().unwrap()]);
    assert_eq!(mass.status.code(), Some(0), "{}", String::from_utf8_lossy(&mass.stderr));
    let report: serde_json::Value = serde_json::from_slice(&mass.stdout).unwrap();
    assert_eq!(report["n"], 3);
    assert!((report["mass"]["extrapolated"].as_f64().unwrap() - 1.0).abs() < 1e-2);
}

#[test]
fn blow_up_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), 0.9999);
    let out_dir = dir.path().join("out");
    let out = rfmass(&["run", &config, "--output", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out_dir.join("failure.json").exists());
    assert!(String::from_utf8_lossy(&out.stderr).contains("blow-up"));
}

#[test]
fn configuration_errors_exit_four() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "[initial]\nkind = \"flat\"\nn = 3\n[grid]\nnodez = 12\n").unwrap();
    let out = rfmass(&["run", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("nodez"));
    assert_eq!(rfmass(&["run", dir.path().join("missing.toml").to_str().unwrap()]).status.code(), Some(4));
    assert_eq!(rfmass(&["--print-defaults", "nope"]).status.code(), Some(4));
    assert_eq!(rfmass(&[]).status.code(), Some(4));
}

#[test]
fn printed_defaults_parse_back() {
    let out = rfmass(&["--print-defaults"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with('#'));
    assert_eq!(ExperimentConfig::from_toml(&text).unwrap(), ExperimentConfig::default());
    let flat = String::from_utf8(rfmass(&["--print-defaults", "flat"]).stdout).unwrap();
    assert_eq!(ExperimentConfig::from_toml(&flat).unwrap().initial.kind, rfmass::initialdata::InitialKind::Flat);
}

#[test]
fn gnuplot_script_to_stdout_and_file() {
    let out = rfmass(&["--gnuplot-script"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("'series.csv'"));
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.gp");
    assert_eq!(rfmass(&["--gnuplot-script", path.to_str().unwrap()]).status.code(), Some(0));
    assert!(fs::read_to_string(path).unwrap().contains("multiplot"));
}

#[test]
fn version_flag() {
    let out = rfmass(&["--version"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8(out.stdout).unwrap().trim(), format!("rfmass {}", env!("CARGO_PKG_VERSION")));
}
