//! Flat `key = value` experiment configuration.
//!
//! ```text
//! # comments start with '#'
//! experiment = ac-compare
//! K = 40
//! I = 5, 10, 15, 20, 25, 30
//! engine = standard, chebyshev
//! ```
//!
//! Keys are case-insensitive; lists are comma-separated.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::Serialize;

use crate::consensus::AcEngine;
use crate::dec_eig::Algorithm;
use crate::detection::{PipelineKind, StatisticKind, SumMode};
use crate::error::{Error, Result};

/// Radius of the default random geometric topology in the unit square.
pub const DEFAULT_RADIUS: f64 = 0.45;
pub const DEFAULT_TOPOLOGY_SEED: u64 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    AcCompare,
    EigConverge,
    MultiEig,
    Roc,
    AuditMessages,
    PropCheck,
}

impl Experiment {
    pub const ALL: [Experiment; 6] = [
        Experiment::AcCompare,
        Experiment::EigConverge,
        Experiment::MultiEig,
        Experiment::Roc,
        Experiment::AuditMessages,
        Experiment::PropCheck,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::AcCompare => "ac-compare",
            Experiment::EigConverge => "eig-converge",
            Experiment::MultiEig => "multi-eig",
            Experiment::Roc => "roc",
            Experiment::AuditMessages => "audit-messages",
            Experiment::PropCheck => "prop-check",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown experiment {s:?}")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TopologySpec {
    Generate { radius: f64, seed: u64 },
    File(PathBuf),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    #[serde(rename = "K")]
    pub nodes: usize,
    #[serde(rename = "N")]
    pub samples: usize,
    #[serde(rename = "M")]
    pub iterations: usize,
    #[serde(rename = "I")]
    pub ac_iterations: Vec<usize>,
    pub sigma2: f64,
    /// One entry per source; empty means noise only.
    pub snr_db: Vec<f64>,
    pub engines: Vec<AcEngine>,
    pub link_failure_prob: f64,
    pub trials: usize,
    pub seed: u64,
    pub topology: TopologySpec,
    pub detectors: Vec<StatisticKind>,
    pub alphas: Vec<f64>,
    pub pipelines: Vec<PipelineKind>,
    pub sum_mode: SumMode,
    pub final_round: bool,
    pub algorithms: Vec<Algorithm>,
    /// 1-based eigenvalue indices tracked by multi-eig.
    pub eig_indices: Vec<usize>,
    pub output: PathBuf,
}

const KEYS: &[&str] = &[
    "experiment",
    "k",
    "n",
    "m",
    "i",
    "sigma2",
    "snr_db",
    "p",
    "engine",
    "link_failure_prob",
    "trials",
    "seed",
    "topology",
    "radius",
    "topology_seed",
    "topology_file",
    "detectors",
    "alphas",
    "pipelines",
    "sum_mode",
    "final_round",
    "algorithms",
    "eig_indices",
    "output",
];

impl ExperimentConfig {
    /// Full-scale defaults for `experiment`.
    pub fn defaults(experiment: Experiment) -> Self {
        use Experiment::*;
        let (m, i, snr, engines): (usize, Vec<usize>, f64, Vec<AcEngine>) = match experiment {
            AcCompare => (20, vec![5, 10, 15, 20, 25, 30], 5.0, vec![AcEngine::Standard, AcEngine::Chebyshev]),
            EigConverge => (20, vec![10, 15], 5.0, vec![AcEngine::Chebyshev]),
            MultiEig => (20, vec![20, 30], 5.0, vec![AcEngine::Chebyshev]),
            Roc => (10, vec![30], 7.0, vec![AcEngine::Chebyshev]),
            AuditMessages => (5, vec![30], 5.0, vec![AcEngine::Chebyshev]),
            PropCheck => (5, vec![10], 5.0, vec![AcEngine::Chebyshev]),
        };
        Self {
            experiment,
            nodes: 40,
            samples: 10,
            iterations: m,
            ac_iterations: i,
            sigma2: 1.0,
            snr_db: vec![snr],
            engines,
            link_failure_prob: 0.0,
            trials: if experiment == AuditMessages { 1 } else { 500 },
            seed: 1,
            topology: TopologySpec::Generate {
                radius: DEFAULT_RADIUS,
                seed: DEFAULT_TOPOLOGY_SEED,
            },
            detectors: vec![StatisticKind::Rt, StatisticKind::Gt],
            alphas: vec![0.1],
            pipelines: vec![PipelineKind::Exact, PipelineKind::Dpm, PipelineKind::Dla],
            sum_mode: SumMode::Ritz,
            final_round: false,
            algorithms: vec![Algorithm::Dpm, Algorithm::Dla],
            eig_indices: vec![1, 3, 5, 9],
            output: PathBuf::from("."),
        }
    }

    /// Checks cross-field invariants.
    pub fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        if self.nodes < 2 {
            errs.push(format!("K must be at least 2, got {}", self.nodes));
        }
        if self.samples == 0 {
            errs.push("N must be positive".into());
        }
        if self.iterations == 0 {
            errs.push("M must be positive".into());
        }
        if self.iterations > self.nodes
            && self.experiment != Experiment::AcCompare
            && self.algorithms.contains(&Algorithm::Dla)
        {
            errs.push(format!("M={} exceeds K={} (Lanczos needs M <= K)", self.iterations, self.nodes));
        }
        if self.ac_iterations.is_empty() || self.ac_iterations.contains(&0) {
            errs.push("I must be a non-empty list of positive integers".into());
        }
        if !(self.sigma2 > 0.0 && self.sigma2.is_finite()) {
            errs.push(format!("sigma2 must be positive, got {}", self.sigma2));
        }
        if self.snr_db.iter().any(|s| !s.is_finite()) {
            errs.push("snr_db must be finite".into());
        }
        if self.engines.is_empty() {
            errs.push("engine list is empty".into());
        }
        if !(0.0..1.0).contains(&self.link_failure_prob) {
            errs.push(format!("link_failure_prob must lie in [0,1), got {}", self.link_failure_prob));
        }
        if self.trials == 0 {
            errs.push("trials must be at least 1".into());
        }
        if let TopologySpec::Generate { radius, .. } = self.topology {
            if !(radius > 0.0 && radius.is_finite()) {
                errs.push(format!("radius must be positive, got {radius}"));
            }
        }
        if self.alphas.iter().any(|a| !(*a > 0.0 && *a < 1.0)) {
            errs.push("alphas must lie in (0,1)".into());
        }
        if self.experiment == Experiment::MultiEig && self.eig_indices.iter().any(|i| *i == 0 || *i > self.nodes) {
            errs.push(format!("eig_indices must lie in 1..={}", self.nodes));
        }
        if self.experiment == Experiment::Roc {
            if self.detectors.is_empty() || self.pipelines.is_empty() {
                errs.push("roc needs at least one detector and one pipeline".into());
            }
            if self.snr_db.is_empty() {
                errs.push("roc needs at least one source (snr_db)".into());
            }
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(errs))
        }
    }
}

/// Parses and validates configuration text, filling defaults for the
/// experiment it names.
pub fn validate_config(text: &str) -> Result<ExperimentConfig> {
    parse_config(text, None)
}

/// As [`validate_config`]; `experiment` supplies the experiment when the
/// text has none and must agree with it otherwise.
pub fn parse_config(text: &str, experiment: Option<Experiment>) -> Result<ExperimentConfig> {
    let mut errs = Vec::new();
    let mut raw: BTreeMap<String, (usize, String)> = BTreeMap::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            errs.push(format!("line {}: expected `key = value`", no + 1));
            continue;
        };
        let key = k.trim().to_ascii_lowercase();
        if !KEYS.contains(&key.as_str()) {
            errs.push(format!("line {}: unknown key `{}`", no + 1, k.trim()));
            continue;
        }
        if raw.insert(key.clone(), (no + 1, v.trim().to_string())).is_some() {
            errs.push(format!("line {}: duplicate key `{key}`", no + 1));
        }
    }

    let mut missing = Vec::new();
    let exp = match (raw.get("experiment"), experiment) {
        (Some((line, v)), given) => match v.parse::<Experiment>() {
            Ok(e) => {
                if given.is_some_and(|g| g != e) {
                    errs.push(format!("line {line}: experiment `{e}` conflicts with requested `{}`", given.unwrap()));
                }
                Some(e)
            }
            Err(e) => {
                errs.push(format!("line {line}: {e}"));
                None
            }
        },
        (None, Some(g)) => Some(g),
        (None, None) => {
            missing.push("experiment");
            None
        }
    };
    if raw.get("topology").is_some_and(|(_, v)| v == "file") && !raw.contains_key("topology_file") {
        missing.push("topology_file");
    }
    if !missing.is_empty() {
        errs.push(format!("missing required keys: {}", missing.join(", ")));
    }
    let Some(exp) = exp else {
        return Err(Error::Config(errs));
    };

    let mut cfg = ExperimentConfig::defaults(exp);
    let mut field = |key: &str, f: &mut dyn FnMut(&str) -> std::result::Result<(), String>| {
        if let Some((line, v)) = raw.get(key) {
            if let Err(e) = f(v) {
                errs.push(format!("line {line}: `{key}`: {e}"));
            }
        }
    };

    field("k", &mut |v| scalar(v).map(|x| cfg.nodes = x));
    field("n", &mut |v| scalar(v).map(|x| cfg.samples = x));
    field("m", &mut |v| scalar(v).map(|x| cfg.iterations = x));
    field("i", &mut |v| list(v).map(|x| cfg.ac_iterations = x));
    field("sigma2", &mut |v| scalar(v).map(|x| cfg.sigma2 = x));
    field("snr_db", &mut |v| list(v).map(|x| cfg.snr_db = x));
    field("engine", &mut |v| list(v).map(|x| cfg.engines = x));
    field("link_failure_prob", &mut |v| scalar(v).map(|x| cfg.link_failure_prob = x));
    field("trials", &mut |v| scalar(v).map(|x| cfg.trials = x));
    field("seed", &mut |v| scalar(v).map(|x| cfg.seed = x));
    field("detectors", &mut |v| list(v).map(|x| cfg.detectors = x));
    field("alphas", &mut |v| list(v).map(|x| cfg.alphas = x));
    field("pipelines", &mut |v| list_with(v, parse_pipeline).map(|x| cfg.pipelines = x));
    field("sum_mode", &mut |v| parse_sum_mode(v).map(|x| cfg.sum_mode = x));
    field("final_round", &mut |v| scalar(v).map(|x| cfg.final_round = x));
    field("algorithms", &mut |v| list_with(v, parse_algorithm).map(|x| cfg.algorithms = x));
    field("eig_indices", &mut |v| list(v).map(|x| cfg.eig_indices = x));
    field("output", &mut |v| {
        cfg.output = PathBuf::from(v);
        Ok(())
    });
    field("p", &mut |v| {
        let p: usize = scalar(v)?;
        match (p, cfg.snr_db.len()) {
            (0, _) => cfg.snr_db.clear(),
            (p, 1) => cfg.snr_db = vec![cfg.snr_db[0]; p],
            (p, n) if p == n => {}
            (p, n) => return Err(format!("P={p} but snr_db lists {n} values")),
        }
        Ok(())
    });

    let mut radius = DEFAULT_RADIUS;
    let mut topo_seed = DEFAULT_TOPOLOGY_SEED;
    field("radius", &mut |v| scalar(v).map(|x| radius = x));
    field("topology_seed", &mut |v| scalar(v).map(|x| topo_seed = x));
    let mut file = None;
    field("topology_file", &mut |v| {
        file = Some(PathBuf::from(v));
        Ok(())
    });
    let mut kind = "generate".to_string();
    field("topology", &mut |v| match v {
        "generate" | "file" => {
            kind = v.to_string();
            Ok(())
        }
        other => Err(format!("expected `generate` or `file`, got {other:?}")),
    });
    cfg.topology = match (kind.as_str(), file) {
        ("file", Some(f)) => TopologySpec::File(f),
        _ => TopologySpec::Generate {
            radius,
            seed: topo_seed,
        },
    };

    if !errs.is_empty() {
        return Err(Error::Config(errs));
    }
    cfg.validate()?;
    Ok(cfg)
}

fn scalar<T: FromStr>(v: &str) -> std::result::Result<T, String>
where
    T::Err: fmt::Display,
{
    v.trim().parse::<T>().map_err(|e| format!("cannot parse {v:?}: {e}"))
}

fn list<T: FromStr>(v: &str) -> std::result::Result<Vec<T>, String>
where
    T::Err: fmt::Display,
{
    list_with(v, |s| scalar(s))
}

fn list_with<T>(v: &str, f: impl Fn(&str) -> std::result::Result<T, String>) -> std::result::Result<Vec<T>, String> {
    v.split(',').map(str::trim).filter(|s| !s.is_empty()).map(f).collect()
}

fn parse_pipeline(s: &str) -> std::result::Result<PipelineKind, String> {
    match s.to_ascii_lowercase().as_str() {
        "exact" => Ok(PipelineKind::Exact),
        "pm" => Ok(PipelineKind::Pm),
        "la" => Ok(PipelineKind::La),
        "dpm" => Ok(PipelineKind::Dpm),
        "dla" => Ok(PipelineKind::Dla),
        other => Err(format!("unknown pipeline {other:?}")),
    }
}

fn parse_algorithm(s: &str) -> std::result::Result<Algorithm, String> {
    match s.to_ascii_lowercase().as_str() {
        "dpm" => Ok(Algorithm::Dpm),
        "dla" => Ok(Algorithm::Dla),
        other => Err(format!("unknown algorithm {other:?}")),
    }
}

fn parse_sum_mode(s: &str) -> std::result::Result<SumMode, String> {
    match s.to_ascii_lowercase().as_str() {
        "ritz" => Ok(SumMode::Ritz),
        "exact-trace" | "exact_trace" | "trace" => Ok(SumMode::ExactTrace),
        other => Err(format!("unknown sum mode {other:?}")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_roc_gets_defaults() {
        let cfg = validate_config("experiment = roc\n").unwrap();
        assert_eq!((cfg.nodes, cfg.samples, cfg.sigma2), (40, 10, 1.0));
        assert_eq!(cfg.snr_db, vec![7.0]);
    }

    #[test]
    fn parses_lists_and_comments() {
        let text = "# header\nexperiment = ac-compare  # trailing\nK = 12\nI = 5, 10\nengine = metropolis,chebyshev\nP = 2\n";
        let cfg = validate_config(text).unwrap();
        assert_eq!(cfg.nodes, 12);
        assert_eq!(cfg.ac_iterations, vec![5, 10]);
        assert_eq!(cfg.engines, vec![AcEngine::Standard, AcEngine::Chebyshev]);
        assert_eq!(cfg.snr_db, vec![5.0, 5.0]);
    }

    #[test]
    fn field_errors() {
        let err = validate_config("experiment = roc\ntrials = 0\n").unwrap_err();
        assert!(err.to_string().contains("trials"), "{err}");
        let err = validate_config("experiment = roc\nalphas = 1.5\n").unwrap_err();
        assert!(err.to_string().contains("alphas"), "{err}");
        let err = validate_config("experiment = roc\ncolour = blue\n").unwrap_err();
        assert!(err.to_string().contains("unknown key `colour`"), "{err}");
    }

    #[test]
    fn missing_keys_listed_together() {
        let err = validate_config("topology = file\n").unwrap_err();
        assert!(err.to_string().contains("missing required keys: experiment, topology_file"), "{err}");
    }

    #[test]
    fn experiment_override() {
        let cfg = parse_config("K = 8\n", Some(Experiment::AuditMessages)).unwrap();
        assert_eq!(cfg.experiment, Experiment::AuditMessages);
        assert!(parse_config("experiment = roc\n", Some(Experiment::MultiEig)).is_err());
    }
}
