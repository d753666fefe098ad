use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn eigennet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_eigennet")).args(args).output().unwrap()
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("run.cfg");
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn successful_run_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "K = 10\nN = 5\nM = 3\nI = 6\nradius = 0.6\n");
    let out = dir.path().join("out");
    let o = eigennet(&["eig-converge", "--config", &cfg, "--out", out.to_str().unwrap(), "--trials", "4"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(out.join("convergence.csv").exists());
    assert!(out.join("report.json").exists());
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("trials=4"), "{stdout}");
}

#[test]
fn invalid_config_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "K = 1\nmystery = 2\n");
    let o = eigennet(&["roc", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&o.stderr);
    assert!(stderr.contains("mystery"), "{stderr}");
}

#[test]
fn unknown_experiment_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "K = 10\n");
    assert_eq!(eigennet(&["fly", "--config", &cfg]).status.code(), Some(1));
}

#[test]
fn missing_config_file_exits_with_one() {
    assert_eq!(eigennet(&["roc", "--config", "/nonexistent/run.cfg"]).status.code(), Some(1));
}

#[test]
fn unwritable_output_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "").unwrap();
    let cfg = write_config(dir.path(), "K = 10\nN = 5\nM = 3\nI = 6\nradius = 0.6\ntrials = 2\n");
    let out = blocker.join("sub");
    let o = eigennet(&["eig-converge", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
}
