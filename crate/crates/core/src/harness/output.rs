use std::fs;
use std::path::{Path, PathBuf};

use super::{Experiment, ExperimentReport};
use crate::error::Result;

pub const CONVERGENCE_HEADER: [&str; 10] =
    ["experiment", "engine", "algorithm", "K", "N", "M", "I", "trials", "eig_index", "mse"];
pub const ROC_HEADER: [&str; 5] = ["detector", "pipeline", "threshold", "pfa", "pd"];
pub const AUDIT_HEADER: [&str; 7] =
    ["algorithm", "node", "degree", "ac_n_calls", "ac_1_calls", "units", "time_periods"];
pub const PROP_HEADER: [&str; 5] = ["check", "quantity", "value", "tolerance", "pass"];

fn write_table<const W: usize>(path: &Path, header: [&str; W], rows: Vec<[String; W]>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes the experiment's CSV table(s) into `dir` and returns their paths.
///
/// Floats use Rust's shortest round-trip formatting, so re-running a
/// configuration reproduces the files byte for byte.
pub fn emit_csv(report: &ExperimentReport, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    match report.config.experiment {
        Experiment::AcCompare | Experiment::EigConverge | Experiment::MultiEig => {
            let path = dir.join("convergence.csv");
            let rows = report
                .convergence
                .iter()
                .map(|r| {
                    [
                        r.experiment.to_string(),
                        r.engine.clone(),
                        r.algorithm.clone(),
                        r.nodes.to_string(),
                        r.samples.to_string(),
                        r.iterations.to_string(),
                        r.ac_iterations.to_string(),
                        r.trials.to_string(),
                        r.eig_index.to_string(),
                        r.mse.to_string(),
                    ]
                })
                .collect();
            write_table(&path, CONVERGENCE_HEADER, rows)?;
            written.push(path);
        }
        Experiment::Roc => {
            let path = dir.join("roc.csv");
            let rows = report
                .roc
                .iter()
                .flat_map(|c| {
                    c.points.iter().map(move |p| {
                        [
                            c.detector.to_string(),
                            c.pipeline.name().to_string(),
                            p.threshold.to_string(),
                            p.pfa.to_string(),
                            p.pd.to_string(),
                        ]
                    })
                })
                .collect();
            write_table(&path, ROC_HEADER, rows)?;
            written.push(path);
        }
        Experiment::AuditMessages => {
            let path = dir.join("audit.csv");
            let rows = report
                .audit
                .iter()
                .map(|r| {
                    [
                        r.algorithm.name().to_string(),
                        r.node.to_string(),
                        r.degree.to_string(),
                        r.ac_n_calls.to_string(),
                        r.ac_1_calls.to_string(),
                        r.units.to_string(),
                        r.time_periods.to_string(),
                    ]
                })
                .collect();
            write_table(&path, AUDIT_HEADER, rows)?;
            written.push(path);
        }
        Experiment::PropCheck => {
            let path = dir.join("prop_check.csv");
            let rows = report
                .prop
                .iter()
                .map(|r| {
                    [
                        r.check.clone(),
                        r.quantity.clone(),
                        r.value.to_string(),
                        r.tolerance.to_string(),
                        r.pass.to_string(),
                    ]
                })
                .collect();
            write_table(&path, PROP_HEADER, rows)?;
            written.push(path);
        }
    }
    Ok(written)
}

/// Writes `report.json` (config echo, summaries, trial seeds, timing).
pub fn write_json(report: &ExperimentReport, dir: &Path) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join("report.json");
    fs::write(&path, serde_json::to_string_pretty(report)?)?;
    Ok(path)
}
