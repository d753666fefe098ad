//! Average consensus `AC_m^t(Z0) = (1/K) 1 1ᵀ Z0 + E_t`.
//!
//! Every engine returns the realized error matrix `E_t` alongside the output
//! so the error analysis in [`crate::dec_eig`] can be checked against
//! simulation. Algorithms only ever read their own row of `z_t`.

use std::collections::HashSet;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, C64};
use crate::topology::{metropolis_weights, metropolis_weights_filtered, spectral_bounds, ChebyshevParams, Graph, WeightMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AcEngine {
    /// Exact averaging, `E_t = 0`.
    Ideal,
    /// `z_t = W_t ⋯ W_1 z0`.
    Standard,
    /// Chebyshev semi-iteration built on `W`.
    Chebyshev,
}

impl AcEngine {
    pub fn name(self) -> &'static str {
        match self {
            AcEngine::Ideal => "ideal",
            AcEngine::Standard => "standard",
            AcEngine::Chebyshev => "chebyshev",
        }
    }
}

impl std::str::FromStr for AcEngine {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ideal" => Ok(AcEngine::Ideal),
            "standard" | "metropolis" => Ok(AcEngine::Standard),
            "chebyshev" => Ok(AcEngine::Chebyshev),
            other => Err(Error::InvalidArgument(format!("unknown consensus engine {other:?}"))),
        }
    }
}

/// Consensus configuration shared by every call an algorithm makes.
#[derive(Clone, Debug)]
pub struct AcConfig {
    pub engine: AcEngine,
    pub iterations: usize,
    pub link_failure_prob: f64,
    pub graph: Arc<Graph>,
    pub weights: Arc<WeightMatrix>,
    pub cheb: Option<ChebyshevParams>,
    /// Seed of the link-failure stream.
    pub seed: u64,
}

impl AcConfig {
    /// Metropolis weights on `graph`, plus Chebyshev bounds when needed.
    pub fn new(engine: AcEngine, graph: Arc<Graph>, iterations: usize) -> Result<Self> {
        graph.require_connected()?;
        let weights = Arc::new(metropolis_weights(&graph));
        let cheb = match engine {
            AcEngine::Chebyshev => Some(spectral_bounds(&weights)?),
            _ => None,
        };
        Ok(Self {
            engine,
            iterations,
            link_failure_prob: 0.0,
            graph,
            weights,
            cheb,
            seed: 0,
        })
    }

    pub fn with_link_failures(mut self, p: f64) -> Self {
        self.link_failure_prob = p;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_iterations(mut self, iterations: usize) -> Self {
        self.iterations = iterations;
        self
    }

    pub fn node_count(&self) -> usize {
        self.graph.node_count()
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.link_failure_prob) {
            return Err(Error::InvalidArgument(format!(
                "link failure probability {} not in [0, 1)",
                self.link_failure_prob
            )));
        }
        if self.weights.node_count() != self.graph.node_count() {
            return Err(Error::Dimension("weight matrix and graph disagree on K".into()));
        }
        if self.engine == AcEngine::Chebyshev && self.cheb.is_none() {
            return Err(Error::InvalidArgument("chebyshev engine requires spectral bounds".into()));
        }
        Ok(())
    }

    pub fn build(&self) -> Result<ConsensusEngine> {
        ConsensusEngine::new(self.clone())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConsensusResult {
    pub z_t: CMatrix,
    /// `E_t = z_t − (1/K) 1 1ᵀ z0`.
    pub error: CMatrix,
    pub iterations_used: usize,
    pub scalars_exchanged_per_node: Vec<u64>,
}

impl ConsensusResult {
    /// Builds a result from an output, recomputing `E_t` against `z0`.
    pub fn from_output(z0: &CMatrix, z_t: CMatrix, iterations_used: usize, scalars: Vec<u64>) -> Self {
        let error = z_t.sub(&z0.consensus_target());
        Self {
            z_t,
            error,
            iterations_used,
            scalars_exchanged_per_node: scalars,
        }
    }
}

/// The `AC_m^t[k]` view: node `k`'s row of the output.
pub fn node_view(result: &ConsensusResult, k: usize) -> Result<&[C64]> {
    let n = result.z_t.rows();
    if k >= n {
        return Err(Error::NodeIndex { index: k, nodes: n });
    }
    Ok(result.z_t.row(k))
}

/// Anything that can play the role of `AC_m^t`.
pub trait Consensus {
    fn node_count(&self) -> usize;

    /// Runs one consensus call on `z0` (row `k` = node `k`'s input).
    fn run(&mut self, z0: &CMatrix) -> Result<ConsensusResult>;
}

/// One-shot consensus with a fresh engine built from `cfg`.
pub fn run_consensus(z0: &CMatrix, cfg: &AcConfig) -> Result<ConsensusResult> {
    cfg.build()?.run(z0)
}

/// Synchronous linear consensus engine. The failure stream advances across
/// calls, so a sequence of calls is reproducible from `AcConfig::seed`.
#[derive(Clone, Debug)]
pub struct ConsensusEngine {
    cfg: AcConfig,
    rng: ChaCha8Rng,
    degrees: Vec<u64>,
    edges: Vec<(usize, usize)>,
}

impl ConsensusEngine {
    pub fn new(cfg: AcConfig) -> Result<Self> {
        cfg.validate()?;
        let rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let degrees = cfg.graph.degrees().into_iter().map(|d| d as u64).collect();
        let edges = cfg.graph.edges();
        Ok(Self { cfg, rng, degrees, edges })
    }

    pub fn config(&self) -> &AcConfig {
        &self.cfg
    }

    /// Weights for one iteration: nominal, or Metropolis on the surviving
    /// edges when links fail.
    fn iteration_weights(&mut self) -> Option<WeightMatrix> {
        let p = self.cfg.link_failure_prob;
        if p <= 0.0 {
            return None;
        }
        let failed: HashSet<(usize, usize)> = self
            .edges
            .iter()
            .filter(|_| self.rng.random::<f64>() < p)
            .copied()
            .collect();
        if failed.is_empty() {
            return None;
        }
        Some(metropolis_weights_filtered(&self.cfg.graph, |u, v| !failed.contains(&(u, v))))
    }

    fn mix(&mut self, x: &CMatrix, out: &mut CMatrix) {
        match self.iteration_weights() {
            Some(w) => w.apply(x, out),
            None => self.cfg.weights.apply(x, out),
        }
    }

    fn standard(&mut self, z0: &CMatrix) -> CMatrix {
        let mut cur = z0.clone();
        let mut next = CMatrix::zeros(z0.rows(), z0.cols());
        for _ in 0..self.cfg.iterations {
            self.mix(&cur, &mut next);
            std::mem::swap(&mut cur, &mut next);
        }
        cur
    }

    /// `x(t) = T_t(B) x0 / T_t(b1)` with `B = (2W − (λmax+λmin) I)/(λmax − λmin)`.
    ///
    /// The three-term recurrence is driven by `ρ_s = τ_{s−1}/τ_s` rather than
    /// `τ_s` itself, which overflows for well-connected graphs.
    fn chebyshev(&mut self, z0: &CMatrix, p: ChebyshevParams) -> CMatrix {
        let t = self.cfg.iterations;
        if t == 0 {
            return z0.clone();
        }
        let (rows, cols) = (z0.rows(), z0.cols());
        let mut wx = CMatrix::zeros(rows, cols);

        if p.degenerate {
            let c = p.lambda_max;
            let mut cur = z0.clone();
            for _ in 0..t {
                self.mix(&cur, &mut wx);
                for (o, x) in wx.as_mut_slice().iter_mut().zip(cur.as_slice()) {
                    *o = (*o - x * c) / (1.0 - c);
                }
                std::mem::swap(&mut cur, &mut wx);
            }
            return cur;
        }

        let gap = p.lambda_max - p.lambda_min;
        let shift = p.lambda_max + p.lambda_min;
        let b1 = p.b1;

        let mut prev = z0.clone();
        self.mix(&prev, &mut wx);
        let mut cur = CMatrix::zeros(rows, cols);
        for ((c, w), x) in cur.as_mut_slice().iter_mut().zip(wx.as_slice()).zip(prev.as_slice()) {
            *c = (w * 2.0 - x * shift) / (gap * b1);
        }
        let mut rho = 1.0 / b1;
        let mut next = CMatrix::zeros(rows, cols);
        for _ in 1..t {
            let denom = 2.0 * b1 - rho;
            let a = 2.0 / denom;
            let b = rho / denom;
            self.mix(&cur, &mut wx);
            for (((n, w), x), xp) in next
                .as_mut_slice()
                .iter_mut()
                .zip(wx.as_slice())
                .zip(cur.as_slice())
                .zip(prev.as_slice())
            {
                let bx = (w * 2.0 - x * shift) / gap;
                *n = bx * a - xp * b;
            }
            rho = 1.0 / denom;
            std::mem::swap(&mut prev, &mut cur);
            std::mem::swap(&mut cur, &mut next);
        }
        cur
    }
}

impl Consensus for ConsensusEngine {
    fn node_count(&self) -> usize {
        self.cfg.node_count()
    }

    fn run(&mut self, z0: &CMatrix) -> Result<ConsensusResult> {
        let k = self.node_count();
        if z0.rows() != k {
            return Err(Error::Dimension(format!(
                "consensus input has {} rows, network has {k} nodes",
                z0.rows()
            )));
        }
        let t = self.cfg.iterations;
        let width = z0.cols() as u64;
        let scalars: Vec<u64> = self.degrees.iter().map(|d| t as u64 * width * d).collect();

        if self.cfg.engine == AcEngine::Ideal {
            let z_t = z0.consensus_target();
            let error = CMatrix::zeros(z0.rows(), z0.cols());
            return Ok(ConsensusResult {
                z_t,
                error,
                iterations_used: t,
                scalars_exchanged_per_node: scalars,
            });
        }
        let z_t = match self.cfg.engine {
            AcEngine::Standard => self.standard(z0),
            AcEngine::Chebyshev => {
                let p = self.cfg.cheb.expect("validated");
                self.chebyshev(z0, p)
            }
            AcEngine::Ideal => unreachable!(),
        };
        Ok(ConsensusResult::from_output(z0, z_t, t, scalars))
    }
}

/// Wraps a consensus engine and adds a caller-chosen error to its output.
///
/// The closure receives the zero-based call index and the input `z0`, and
/// returns the matrix to add to `z_t` (or `None` to leave the call alone).
/// The reported `E_t` includes the injected part.
pub struct InjectedConsensus<C, F> {
    base: C,
    inject: F,
    calls: usize,
}

impl<C, F> InjectedConsensus<C, F>
where
    C: Consensus,
    F: FnMut(usize, &CMatrix) -> Option<CMatrix>,
{
    pub fn new(base: C, inject: F) -> Self {
        Self { base, inject, calls: 0 }
    }

    pub fn calls(&self) -> usize {
        self.calls
    }
}

impl<C, F> Consensus for InjectedConsensus<C, F>
where
    C: Consensus,
    F: FnMut(usize, &CMatrix) -> Option<CMatrix>,
{
    fn node_count(&self) -> usize {
        self.base.node_count()
    }

    fn run(&mut self, z0: &CMatrix) -> Result<ConsensusResult> {
        let base = self.base.run(z0)?;
        let call = self.calls;
        self.calls += 1;
        match (self.inject)(call, z0) {
            None => Ok(base),
            Some(extra) => {
                if (extra.rows(), extra.cols()) != (z0.rows(), z0.cols()) {
                    return Err(Error::Dimension("injected error has the wrong shape".into()));
                }
                let z_t = base.z_t.add(&extra);
                Ok(ConsensusResult::from_output(
                    z0,
                    z_t,
                    base.iterations_used,
                    base.scalars_exchanged_per_node,
                ))
            }
        }
    }
}
