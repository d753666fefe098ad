//! Eigenvalue-based detection statistics, threshold calibration and ROC
//! estimation.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::consensus::{AcConfig, Consensus};
use crate::dec_eig::{default_dla_start, default_dpm_start, dla_run_with, dpm_run, DlaOptions};
use crate::eigencore::{
    covariance_spectrum, filter_ritz_sequence, lanczos, power_method, sample_covariance, tridiagonal_eigenvalues,
    SampleMatrix,
};
use crate::error::{Error, Result};
use crate::linalg::{norm_sq, CMatrix, C64};
use crate::signal_model::{gen_h0, SignalConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum StatisticKind {
    /// Roy's largest root `λ1/σ²`.
    #[serde(rename = "RT")]
    Rt,
    /// `λ1 / Σλ`.
    #[serde(rename = "GT")]
    Gt,
    /// Sphericity `Πλ / (Σλ/L)^L`.
    #[serde(rename = "ST")]
    St,
    /// John's test `Σλ² / (Σλ)²`.
    #[serde(rename = "JT")]
    Jt,
}

impl StatisticKind {
    pub const ALL: [StatisticKind; 4] = [StatisticKind::Rt, StatisticKind::Gt, StatisticKind::St, StatisticKind::Jt];

    pub fn name(self) -> &'static str {
        match self {
            StatisticKind::Rt => "RT",
            StatisticKind::Gt => "GT",
            StatisticKind::St => "ST",
            StatisticKind::Jt => "JT",
        }
    }
}

impl fmt::Display for StatisticKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StatisticKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "RT" => Ok(StatisticKind::Rt),
            "GT" => Ok(StatisticKind::Gt),
            "ST" => Ok(StatisticKind::St),
            "JT" => Ok(StatisticKind::Jt),
            other => Err(Error::InvalidArgument(format!("unknown detector {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Statistic {
    pub kind: StatisticKind,
    pub value: f64,
    /// Some input eigenvalue was negative and got clamped to 0.
    pub clamped: bool,
}

pub fn compute_statistic(kind: StatisticKind, eigenvalues: &[f64], sigma2: Option<f64>) -> Result<Statistic> {
    compute_statistic_with_sum(kind, eigenvalues, sigma2, None)
}

/// Like [`compute_statistic`], with `Σλ` optionally replaced by a known
/// total such as `trace(R)`.
pub fn compute_statistic_with_sum(
    kind: StatisticKind,
    eigenvalues: &[f64],
    sigma2: Option<f64>,
    sum: Option<f64>,
) -> Result<Statistic> {
    if eigenvalues.is_empty() {
        return Err(Error::InvalidArgument("empty eigenvalue list".into()));
    }
    if eigenvalues.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidArgument("non-finite eigenvalue".into()));
    }
    let clamped = eigenvalues.iter().any(|x| *x < 0.0);
    let lam: Vec<f64> = eigenvalues.iter().map(|x| x.max(0.0)).collect();
    let l1 = lam.iter().copied().fold(0.0, f64::max);
    let total = sum.unwrap_or_else(|| lam.iter().sum());
    let undefined = || Error::UndefinedStatistic(format!("{kind} of an all-zero spectrum"));
    let value = match kind {
        StatisticKind::Rt => {
            let s2 = sigma2.ok_or_else(|| Error::InvalidArgument("RT needs the noise variance".into()))?;
            if !(s2 > 0.0) {
                return Err(Error::InvalidArgument(format!("sigma2 must be positive, got {s2}")));
            }
            l1 / s2
        }
        StatisticKind::Gt => {
            if total <= 0.0 {
                return Err(undefined());
            }
            l1 / total
        }
        StatisticKind::St => {
            if total <= 0.0 {
                return Err(undefined());
            }
            let len = lam.len() as f64;
            let mean = total / len;
            if lam.contains(&0.0) {
                0.0
            } else {
                (lam.iter().map(|x| (x / mean).ln()).sum::<f64>()).exp()
            }
        }
        StatisticKind::Jt => {
            if total <= 0.0 {
                return Err(undefined());
            }
            lam.iter().map(|x| x * x).sum::<f64>() / (total * total)
        }
    };
    Ok(Statistic { kind, value, clamped })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Hypothesis {
    H0,
    H1,
}

/// H1 iff `value > threshold`.
pub fn local_decide(value: f64, threshold: f64) -> Hypothesis {
    if value > threshold {
        Hypothesis::H1
    } else {
        Hypothesis::H0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DetectorConfig {
    pub kind: StatisticKind,
    pub alpha: f64,
    pub threshold: Option<f64>,
    pub calibration_trials: usize,
    pub sigma2: f64,
}

impl DetectorConfig {
    pub fn new(kind: StatisticKind, alpha: f64, calibration_trials: usize, sigma2: f64) -> Result<Self> {
        let cfg = Self {
            kind,
            alpha,
            threshold: None,
            calibration_trials,
            sigma2,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidArgument(format!("alpha must lie in (0,1), got {}", self.alpha)));
        }
        if self.calibration_trials < 1000 {
            return Err(Error::InvalidArgument(format!(
                "calibration needs at least 1000 trials, got {}",
                self.calibration_trials
            )));
        }
        if !(self.sigma2 > 0.0) {
            return Err(Error::InvalidArgument("sigma2 must be positive".into()));
        }
        Ok(())
    }
}

/// Nearest-rank-higher `(1 − α)` quantile of the H0 statistic values.
pub fn threshold_from_samples(h0_values: &[f64], alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidArgument(format!("alpha must lie in (0,1), got {alpha}")));
    }
    let needed = (10.0 / alpha).ceil() as usize;
    if h0_values.len() < needed {
        return Err(Error::InsufficientTrials {
            needed,
            got: h0_values.len(),
        });
    }
    let mut v = h0_values.to_vec();
    v.sort_by(f64::total_cmp);
    let rank = ((1.0 - alpha) * v.len() as f64).ceil() as usize;
    Ok(v[rank.clamp(1, v.len()) - 1])
}

/// Derives per-trial seeds from a master seed (splitmix64 of
/// `master + 0x9E3779B97F4A7C15 · (index + 1)`).
pub fn trial_seed(master: u64, index: u64) -> u64 {
    let mut z = master.wrapping_add(0x9E37_79B9_7F4A_7C15u64.wrapping_mul(index.wrapping_add(1)));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Calibrates `θ(α)` on `calibration_trials` H0 instances drawn from
/// `signal` with trial seeds derived from `seed`, pooling every node's
/// statistic.
pub fn calibrate_threshold(
    cfg: &DetectorConfig,
    signal: &SignalConfig,
    pipeline: &EigenPipeline,
    seed: u64,
) -> Result<f64> {
    cfg.validate()?;
    let mut values = Vec::with_capacity(cfg.calibration_trials * signal.nodes);
    for t in 0..cfg.calibration_trials as u64 {
        let s = trial_seed(seed, t);
        let y = gen_h0(&signal.with_seed(s))?;
        let out = pipeline.run(&y, s)?;
        values.extend(pipeline.statistic(&out, cfg.kind, Some(cfg.sigma2))?);
    }
    threshold_from_samples(&values, cfg.alpha)
}

/// One extra scalar consensus over the per-node statistics.
pub fn statistic_consensus(values: &[f64], ac: &mut dyn Consensus) -> Result<Vec<f64>> {
    if values.len() != ac.node_count() {
        return Err(Error::Dimension(format!(
            "{} statistics for {} nodes",
            values.len(),
            ac.node_count()
        )));
    }
    let z0 = CMatrix::from_fn(values.len(), 1, |k, _| C64::new(values[k], 0.0));
    Ok(ac.run(&z0)?.z_t.col(0).iter().map(|z| z.re).collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RocPoint {
    pub threshold: f64,
    pub pfa: f64,
    pub pd: f64,
}

/// Empirical ROC. The default grid is `−∞`, the sorted distinct H0 values,
/// and `+∞`.
pub fn roc_curve(h0: &[f64], h1: &[f64], grid: Option<&[f64]>) -> Vec<RocPoint> {
    let mut thresholds: Vec<f64> = match grid {
        Some(g) => g.to_vec(),
        None => {
            let mut g = vec![f64::NEG_INFINITY];
            g.extend_from_slice(h0);
            g.push(f64::INFINITY);
            g
        }
    };
    thresholds.sort_by(f64::total_cmp);
    thresholds.dedup();
    let mut a = h0.to_vec();
    let mut b = h1.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let above = |sorted: &[f64], t: f64| {
        if sorted.is_empty() {
            return 0.0;
        }
        let at_or_below = sorted.partition_point(|x| *x <= t);
        (sorted.len() - at_or_below) as f64 / sorted.len() as f64
    };
    thresholds
        .into_iter()
        .map(|t| RocPoint {
            threshold: t,
            pfa: above(&a, t),
            pd: above(&b, t),
        })
        .collect()
}

/// Best detection probability among operating points with `pfa ≤ target`.
pub fn pd_at_pfa(roc: &[RocPoint], target: f64) -> f64 {
    roc.iter().filter(|p| p.pfa <= target).map(|p| p.pd).fold(0.0, f64::max)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum PipelineKind {
    /// Full spectrum of `R`.
    Exact,
    /// Centralized power method.
    Pm,
    /// Centralized Lanczos.
    La,
    Dpm,
    Dla,
}

impl PipelineKind {
    pub fn name(self) -> &'static str {
        match self {
            PipelineKind::Exact => "exact",
            PipelineKind::Pm => "pm",
            PipelineKind::La => "la",
            PipelineKind::Dpm => "dpm",
            PipelineKind::Dla => "dla",
        }
    }
}

/// What replaces `Σλ` in GT, ST and JT.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SumMode {
    /// Sum of the available eigenvalue estimates.
    Ritz,
    /// `trace(R)`; decentralized pipelines get it as `(K/N)·AC(‖y_k‖²)`.
    ExactTrace,
}

/// How a detector obtains eigenvalues from a sample matrix.
#[derive(Clone, Debug)]
pub struct EigenPipeline {
    pub kind: PipelineKind,
    pub iterations: usize,
    pub consensus: Option<AcConfig>,
    pub sum_mode: SumMode,
    pub dla: DlaOptions,
    /// Replace each node's statistic by one more consensus round over them.
    pub final_round: bool,
}

/// Eigenvalue estimates of one trial, one list per node.
#[derive(Clone, Debug)]
pub struct PipelineOutput {
    pub per_node: Vec<Vec<f64>>,
    /// Per-node `trace(R)` estimate when the pipeline uses it.
    pub trace: Option<Vec<f64>>,
    seed: u64,
}

impl EigenPipeline {
    fn make(kind: PipelineKind, iterations: usize, consensus: Option<AcConfig>) -> Self {
        Self {
            kind,
            iterations,
            consensus,
            sum_mode: SumMode::Ritz,
            dla: DlaOptions::default(),
            final_round: false,
        }
    }

    pub fn exact() -> Self {
        Self::make(PipelineKind::Exact, 0, None)
    }

    pub fn pm(iterations: usize) -> Self {
        Self::make(PipelineKind::Pm, iterations, None)
    }

    pub fn la(iterations: usize) -> Self {
        Self::make(PipelineKind::La, iterations, None)
    }

    pub fn dpm(iterations: usize, ac: AcConfig) -> Self {
        Self::make(PipelineKind::Dpm, iterations, Some(ac))
    }

    pub fn dla(iterations: usize, ac: AcConfig) -> Self {
        Self::make(PipelineKind::Dla, iterations, Some(ac))
    }

    pub fn with_sum_mode(mut self, mode: SumMode) -> Self {
        self.sum_mode = mode;
        self
    }

    pub fn with_final_round(mut self, on: bool) -> Self {
        self.final_round = on;
        self
    }

    pub fn with_dla_options(mut self, opts: DlaOptions) -> Self {
        self.dla = opts;
        self
    }

    fn engine(&self, seed: u64) -> Result<crate::consensus::ConsensusEngine> {
        self.consensus
            .as_ref()
            .ok_or_else(|| Error::InvalidArgument(format!("{} pipeline needs a consensus config", self.kind.name())))?
            .clone()
            .with_seed(seed)
            .build()
    }

    /// Eigenvalue estimates for `y`; `seed` drives the start vector and the
    /// consensus link failures.
    pub fn run(&self, y: &SampleMatrix, seed: u64) -> Result<PipelineOutput> {
        let k = y.nodes();
        let n = y.samples();
        let replicate = |v: Vec<f64>| vec![v; k];
        let per_node = match self.kind {
            PipelineKind::Exact => replicate(covariance_spectrum(y)),
            PipelineKind::Pm => {
                let v0 = default_dpm_start(k, seed);
                replicate(vec![power_method(&sample_covariance(y), &v0, self.iterations)?.lambda])
            }
            PipelineKind::La => {
                let out = lanczos(&sample_covariance(y), &default_dla_start(k), self.iterations)?;
                let t = &out.t;
                let values = if self.dla.filter {
                    let raw: Vec<Vec<f64>> = (1..=t.size()).map(|j| tridiagonal_eigenvalues(&t.leading(j))).collect();
                    filter_ritz_sequence(&raw, k, n, self.dla.spurious_tol_rel).pop().unwrap_or_default()
                } else {
                    tridiagonal_eigenvalues(t)
                };
                replicate(values)
            }
            PipelineKind::Dpm => {
                let mut ac = self.engine(seed)?;
                dpm_run(y, &mut ac, self.iterations, &default_dpm_start(k, seed))?
                    .lambda
                    .into_iter()
                    .map(|l| vec![l])
                    .collect()
            }
            PipelineKind::Dla => {
                let mut ac = self.engine(seed)?;
                dla_run_with(y, &mut ac, self.iterations, &default_dla_start(k), &self.dla)?.eigenvalues
            }
        };
        let trace = match self.sum_mode {
            SumMode::Ritz => None,
            SumMode::ExactTrace => Some(self.trace_estimate(y, seed)?),
        };
        Ok(PipelineOutput { per_node, trace, seed })
    }

    fn trace_estimate(&self, y: &SampleMatrix, seed: u64) -> Result<Vec<f64>> {
        let (k, n) = (y.nodes(), y.samples());
        let energies: Vec<f64> = (0..k).map(|i| norm_sq(y.row(i))).collect();
        let scale = k as f64 / n as f64;
        match self.kind {
            PipelineKind::Dpm | PipelineKind::Dla => {
                let mut ac = self.engine(seed ^ 0x54_5241_4345)?;
                Ok(statistic_consensus(&energies, &mut ac)?.into_iter().map(|m| m * scale).collect())
            }
            _ => Ok(vec![energies.iter().sum::<f64>() / n as f64; k]),
        }
    }

    /// Per-node statistic for one trial.
    pub fn statistic(&self, out: &PipelineOutput, kind: StatisticKind, sigma2: Option<f64>) -> Result<Vec<f64>> {
        let mut values = Vec::with_capacity(out.per_node.len());
        for (k, lam) in out.per_node.iter().enumerate() {
            let sum = out.trace.as_ref().map(|t| t[k]);
            values.push(compute_statistic_with_sum(kind, lam, sigma2, sum)?.value);
        }
        if self.final_round && self.consensus.is_some() {
            let mut ac = self.engine(out.seed ^ 0x46_494e_414c)?;
            values = statistic_consensus(&values, &mut ac)?;
        }
        Ok(values)
    }
}
