use std::fs;

use eigennet_core::eigencore::sample_covariance;
use eigennet_core::harness::{self, emit_csv, validate_config, ExperimentConfig, ExperimentReport};
use eigennet_core::signal_model::{gen_h0, SignalConfig};

fn small(text: &str) -> ExperimentConfig {
    validate_config(&format!("K = 12\nN = 6\nM = 4\nI = 8\ntrials = 6\nradius = 0.6\n{text}")).unwrap()
}

#[test]
fn every_experiment_runs_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    for (name, file) in [
        ("ac-compare", "convergence.csv"),
        ("eig-converge", "convergence.csv"),
        ("multi-eig", "convergence.csv"),
        ("roc", "roc.csv"),
        ("audit-messages", "audit.csv"),
        ("prop-check", "prop_check.csv"),
    ] {
        let cfg = small(&format!("experiment = {name}\neig_indices = 1, 3\n"));
        let out = dir.path().join(name);
        harness::run_to_dir(&cfg, &out).unwrap();
        let csv = fs::read_to_string(out.join(file)).unwrap();
        assert!(csv.lines().count() > 1, "{name}: {csv}");
        assert!(out.join("report.json").exists());
    }
}

#[test]
fn rerun_gives_identical_csv() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["eig-converge", "roc"] {
        let cfg = small(&format!("experiment = {name}\n"));
        let a = harness::run(&cfg).unwrap();
        let b = harness::run(&cfg).unwrap();
        let pa = emit_csv(&a, &dir.path().join("a")).unwrap();
        let pb = emit_csv(&b, &dir.path().join("b")).unwrap();
        for (x, y) in pa.iter().zip(&pb) {
            assert_eq!(fs::read(x).unwrap(), fs::read(y).unwrap(), "{name}");
        }
    }
}

#[test]
fn empty_report_writes_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let report = ExperimentReport::empty(small("experiment = eig-converge\n"));
    let paths = emit_csv(&report, dir.path()).unwrap();
    let text = fs::read_to_string(&paths[0]).unwrap();
    assert_eq!(text, "experiment,engine,algorithm,K,N,M,I,trials,eig_index,mse\n");
}

#[test]
fn convergence_rows_echo_config() {
    let cfg = small("experiment = eig-converge\n");
    let report = harness::run(&cfg).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = &emit_csv(&report, dir.path()).unwrap()[0];
    let mut reader = csv::Reader::from_path(path).unwrap();
    let mut rows = 0;
    for rec in reader.records() {
        let rec = rec.unwrap();
        assert_eq!(&rec[0], "eig-converge");
        assert_eq!(&rec[3], "12");
        assert_eq!(&rec[4], "6");
        assert_eq!(&rec[7], "6");
        assert!(rec[5].parse::<usize>().unwrap() <= 4);
        rows += 1;
    }
    assert!(rows > 0);
}

#[test]
fn noise_covariance_is_white() {
    let y = gen_h0(&SignalConfig::noise_only(4, 100_000, 2.0, 17).unwrap()).unwrap();
    let r = sample_covariance(&y);
    for i in 0..4 {
        for j in 0..4 {
            let want = if i == j { 2.0 } else { 0.0 };
            let got = r.matrix()[(i, j)];
            assert!((got.re - want).abs() < 0.02 && got.im.abs() < 0.02, "R[{i},{j}] = {got}");
        }
    }
}

#[test]
fn invalid_configs_are_rejected() {
    for text in ["experiment = roc\nK = 1\n", "experiment = eig-converge\nK = 4\nM = 9\n", "experiment = nope\n", "bogus = 3\n"] {
        assert!(validate_config(text).is_err(), "{text}");
    }
}
