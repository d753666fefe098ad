//! Monte-Carlo experiment driver and result emission.
//!
//! [`run`] executes one validated [`ExperimentConfig`] and returns an
//! [`ExperimentReport`]; [`emit_csv`] and [`write_json`] write it out. Trial
//! `t` draws its data from seed [`trial_seed`]`(seed, t)`, so a report is a
//! pure function of the configuration.

mod config;
mod experiments;
mod output;

use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use serde::Serialize;

pub use crate::detection::trial_seed;
pub use config::{
    parse_config, validate_config, Experiment, ExperimentConfig, TopologySpec, DEFAULT_RADIUS, DEFAULT_TOPOLOGY_SEED,
};
pub use output::{emit_csv, write_json, AUDIT_HEADER, CONVERGENCE_HEADER, PROP_HEADER, ROC_HEADER};

use crate::dec_eig::Algorithm;
use crate::detection::{PipelineKind, RocPoint, StatisticKind};
use crate::error::{Error, Result};
use crate::topology::{generate_random_geometric, load_edge_list, Graph};

/// One MSE value of a convergence experiment.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub experiment: Experiment,
    /// Consensus engine, or `ideal` for centralized references.
    pub engine: String,
    pub algorithm: String,
    #[serde(rename = "K")]
    pub nodes: usize,
    #[serde(rename = "N")]
    pub samples: usize,
    #[serde(rename = "M")]
    pub iterations: usize,
    #[serde(rename = "I")]
    pub ac_iterations: usize,
    pub trials: usize,
    pub eig_index: usize,
    pub mse: f64,
}

/// Threshold calibrated for a target false-alarm rate and what it achieved.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OperatingPoint {
    pub alpha: f64,
    pub threshold: f64,
    pub pfa: f64,
    pub pd: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RocCurve {
    pub detector: StatisticKind,
    pub pipeline: PipelineKind,
    #[serde(skip)]
    pub points: Vec<RocPoint>,
    pub operating: Vec<OperatingPoint>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AuditRow {
    pub algorithm: Algorithm,
    pub node: usize,
    pub degree: usize,
    pub ac_n_calls: u64,
    pub ac_1_calls: u64,
    pub units: u64,
    pub time_periods: u64,
}

/// One checked quantity of the error-propagation report.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PropRow {
    pub check: String,
    pub quantity: String,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub convergence: Vec<ConvergenceRow>,
    pub roc: Vec<RocCurve>,
    pub audit: Vec<AuditRow>,
    pub prop: Vec<PropRow>,
    pub trial_seeds: Vec<u64>,
    pub duration_secs: f64,
}

impl ExperimentReport {
    pub fn empty(config: ExperimentConfig) -> Self {
        Self {
            config,
            convergence: Vec::new(),
            roc: Vec::new(),
            audit: Vec::new(),
            prop: Vec::new(),
            trial_seeds: Vec::new(),
            duration_secs: 0.0,
        }
    }

    /// The MSE row matching the given coordinates.
    pub fn mse(&self, engine: &str, algorithm: &str, m: usize, i: usize, eig_index: usize) -> Option<f64> {
        self.convergence
            .iter()
            .find(|r| {
                r.engine == engine
                    && r.algorithm == algorithm
                    && r.iterations == m
                    && r.ac_iterations == i
                    && r.eig_index == eig_index
            })
            .map(|r| r.mse)
    }

    pub fn curve(&self, detector: StatisticKind, pipeline: PipelineKind) -> Option<&RocCurve> {
        self.roc.iter().find(|c| c.detector == detector && c.pipeline == pipeline)
    }
}

/// Builds the configured topology; it must be connected and have `K` nodes.
pub fn build_topology(cfg: &ExperimentConfig) -> Result<Arc<Graph>> {
    let g = match &cfg.topology {
        TopologySpec::Generate { radius, seed } => generate_random_geometric(cfg.nodes, *radius, *seed)?,
        TopologySpec::File(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Io(format!("cannot read topology file {}: {e}", path.display())))?;
            load_edge_list(&text)?
        }
    };
    if g.node_count() != cfg.nodes {
        return Err(Error::Config(vec![format!(
            "topology has {} nodes but K = {}",
            g.node_count(),
            cfg.nodes
        )]));
    }
    g.require_connected()?;
    Ok(Arc::new(g))
}

/// Runs the configured experiment.
pub fn run(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let start = Instant::now();
    let graph = build_topology(cfg)?;
    let mut report = match cfg.experiment {
        Experiment::AcCompare => experiments::ac_compare(cfg, &graph)?,
        Experiment::EigConverge => experiments::eig_converge(cfg, &graph)?,
        Experiment::MultiEig => experiments::multi_eig(cfg, &graph)?,
        Experiment::Roc => experiments::roc(cfg, &graph)?,
        Experiment::AuditMessages => experiments::audit(cfg, &graph)?,
        Experiment::PropCheck => experiments::prop_check(cfg, &graph)?,
    };
    report.duration_secs = start.elapsed().as_secs_f64();
    Ok(report)
}

/// Runs the experiment and writes its CSV files plus `report.json` into
/// `dir`.
pub fn run_to_dir(cfg: &ExperimentConfig, dir: &Path) -> Result<ExperimentReport> {
    let report = run(cfg)?;
    emit_csv(&report, dir)?;
    write_json(&report, dir)?;
    Ok(report)
}
