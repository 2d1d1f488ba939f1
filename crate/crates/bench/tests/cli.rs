use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::tempdir;

fn gmdsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gmdsim")).args(args).output().expect("spawn gmdsim")
}

fn ok(out: &Output) {
    assert!(out.status.success(), "stderr:\n{}", String::from_utf8_lossy(&out.stderr));
}

const TINY: &[&str] = &["--set", "channels_per_point=2", "--set", "symbols_per_channel=5", "-q"];

fn fig3(dir: &Path, name: &str, extra: &[&str]) -> String {
    let out_path = dir.join(name);
    let mut args = vec!["fig3", "--out", out_path.to_str().unwrap()];
    args.extend_from_slice(TINY);
    args.extend_from_slice(extra);
    ok(&gmdsim(&args));
    fs::read_to_string(out_path).unwrap()
}

#[test]
fn config_file_run_counts_bits() {
    let dir = tempdir().unwrap();
    let cfg = dir.path().join("one.toml");
    let csv = dir.path().join("one.csv");
    fs::write(
        &cfg,
        format!(
            "name = 'one'\noutput_path = '{}'\nschemes = ['gmd_hybrid']\nsnr_db_grid = [0]\nchannels_per_point = 2\nsymbols_per_channel = 7\n",
            csv.display()
        ),
    )
    .unwrap();
    ok(&gmdsim(&["run", cfg.to_str().unwrap(), "-q"]));
    let text = fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "scheme,snr_db,ber,bits,errors,trials,seed");
    assert_eq!(lines.len(), 2);
    let fields: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(fields[0], "gmd_hybrid");
    assert_eq!(fields[3], (2 * 7 * 4 * 4).to_string());
    assert_eq!(fields[5], "2");

    let meta = fs::read_to_string(dir.path().join("one.meta.json")).unwrap();
    let meta: serde_json::Value = serde_json::from_str(&meta).unwrap();
    assert_eq!(meta["experiment"]["name"], "one");
    assert!(meta["build"]["git"].is_string());
    assert!(dir.path().join("one.plot.csv").exists());
}

#[test]
fn fig3_has_32_rows_and_is_reproducible() {
    let dir = tempdir().unwrap();
    let a = fig3(dir.path(), "a.csv", &["--threads", "1"]);
    let b = fig3(dir.path(), "b.csv", &["--threads", "3"]);
    assert_eq!(a.lines().count(), 33);
    assert_eq!(a, b);
    let plot = fs::read_to_string(dir.path().join("a.plot.csv")).unwrap();
    assert_eq!(plot.lines().next().unwrap(), "snr_db,gmd_digital,gmd_hybrid,svd_digital,svd_hybrid");
    assert_eq!(plot.lines().count(), 9);
}

#[test]
fn seed_flag_changes_results() {
    let dir = tempdir().unwrap();
    let a = fig3(dir.path(), "a.csv", &["--seed", "7"]);
    let b = fig3(dir.path(), "b.csv", &["--seed", "8"]);
    assert_ne!(a, b);
}

#[test]
fn stdout_mode_prints_csv() {
    let dir = tempdir().unwrap();
    let out_path = dir.path().join("s.csv");
    let mut args = vec!["run", "--stdout", "--out", out_path.to_str().unwrap(), "--set", "snr_db_grid=[2]"];
    args.extend_from_slice(TINY);
    let out = gmdsim(&args);
    ok(&out);
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert_eq!(stdout, fs::read_to_string(out_path).unwrap());
    assert_eq!(stdout.lines().count(), 5);
}

#[test]
fn thread_count_from_environment() {
    let dir = tempdir().unwrap();
    let out_path = dir.path().join("e.csv");
    let out = Command::new(env!("CARGO_BIN_EXE_gmdsim"))
        .args(["run", "--out", out_path.to_str().unwrap(), "--set", "snr_db_grid=[0]"])
        .args(TINY)
        .env("GMDSIM_THREADS", "2")
        .output()
        .unwrap();
    ok(&out);
    let baseline = fig3(dir.path(), "f.csv", &["--set", "snr_db_grid=[0]"]);
    assert_eq!(fs::read_to_string(out_path).unwrap(), baseline);
}

#[test]
fn errors_exit_nonzero_with_diagnostic() {
    let out = gmdsim(&["run", "--set", "n_s=8", "-q"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("n_s"));

    let out = gmdsim(&["run", "--set", "bogus=1", "-q"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("bogus"));

    let out = gmdsim(&["run", "/nonexistent/config.toml"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("/nonexistent/config.toml"));
}

#[test]
fn gmd_check_reports_json() {
    let out = gmdsim(&["gmd-check", "--channels", "25", "--seed", "3"]);
    ok(&out);
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["channels"], 25);
    assert!(report["diag"].as_f64().unwrap() < 1e-9);
}
