use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::consensus::Consensus;
use crate::eigencore::SampleMatrix;
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, C64};

use super::audit::MessageAudit;
use super::node::NodeState;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct DpmOptions {
    /// Also produce the estimate each node would have returned had the run
    /// stopped at every `j < M`. Costs one uncounted scalar consensus per
    /// iteration; the vector consensus is shared with the next iteration.
    pub track_history: bool,
}

/// Consensus errors realized during a DPM run.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct DpmErrorTrace {
    /// `E^(I)(j)`, K×N, for `j = 1..M`.
    pub e1: Vec<CMatrix>,
    /// `d(j)[k] = (K/N) e(j)[k]ᴴ y_k`, for `j = 1..M`.
    pub d: Vec<Vec<C64>>,
    /// `E^(II)`, K×N, from the final-stage vector consensus.
    pub e2: CMatrix,
    /// `e^(III)`, from the final-stage scalar consensus.
    pub e3: Vec<C64>,
}

#[derive(Clone, Debug)]
pub struct DpmOutput {
    /// `λ̂1[k]` per node.
    pub lambda: Vec<f64>,
    pub nodes: Vec<NodeState>,
    /// `v(0), …, v(M)` as global vectors.
    pub v_history: Vec<Vec<C64>>,
    /// `lambda_history[j−1][k]` is node k's estimate after `j` iterations.
    /// Empty unless history was requested.
    pub lambda_history: Vec<Vec<f64>>,
    pub trace: DpmErrorTrace,
    pub audit: MessageAudit,
}

/// Circularly-symmetric unit-variance start vector.
pub fn default_dpm_start(nodes: usize, seed: u64) -> Vec<C64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = Normal::new(0.0, std::f64::consts::FRAC_1_SQRT_2).expect("valid normal");
    (0..nodes).map(|_| C64::new(g.sample(&mut rng), g.sample(&mut rng))).collect()
}

pub fn dpm_run(y: &SampleMatrix, ac: &mut dyn Consensus, iterations: usize, v0: &[C64]) -> Result<DpmOutput> {
    dpm_run_with(y, ac, iterations, v0, &DpmOptions::default())
}

/// Decentralized power method.
///
/// Each of the `M` iterations is one width-N consensus on the rows
/// `v[k]* y_kᵀ`, after which node `k` sets `v[k] = (K/N) z[k]ᴴ y_k`. The final
/// stage runs one more width-N consensus and a scalar consensus on `|v[k]|²`
/// and returns the per-node Rayleigh quotient.
pub fn dpm_run_with(
    y: &SampleMatrix,
    ac: &mut dyn Consensus,
    iterations: usize,
    v0: &[C64],
    opts: &DpmOptions,
) -> Result<DpmOutput> {
    let k_nodes = y.nodes();
    let n = y.samples();
    check_inputs(k_nodes, ac.node_count(), iterations, v0)?;

    let mut nodes: Vec<NodeState> = (0..k_nodes).map(|k| NodeState::new(k, y.row(k), k_nodes, v0[k])).collect();
    let mut audit = MessageAudit::new(k_nodes);
    let mut trace = DpmErrorTrace::default();
    let mut v_history = vec![v0.to_vec()];
    let mut lambda_history = Vec::new();

    for j in 1..=iterations {
        let z0 = vector_input(&nodes, n);
        let res = ac.run(&z0)?;
        audit.record(&res, true);
        if opts.track_history && j >= 2 {
            lambda_history.push(estimate(&mut nodes, ac, &res.z_t)?);
        }
        trace.d.push(nodes.iter().enumerate().map(|(k, s)| s.local_product(res.error.row(k))).collect());
        trace.e1.push(res.error);
        for (k, s) in nodes.iter_mut().enumerate() {
            s.power_step(res.z_t.row(k));
        }
        v_history.push(nodes.iter().map(|s| s.v_cur).collect());
    }

    let z0 = vector_input(&nodes, n);
    let res = ac.run(&z0)?;
    audit.record(&res, true);
    let s0 = scalar_input(&nodes);
    let sres = ac.run(&s0)?;
    audit.record(&sres, false);
    let lambda = rayleigh(&mut nodes, &res.z_t, &sres.z_t)?;
    if opts.track_history {
        lambda_history.push(lambda.clone());
    }
    trace.e2 = res.error;
    trace.e3 = sres.error.col(0);

    Ok(DpmOutput {
        lambda,
        nodes,
        v_history,
        lambda_history,
        trace,
        audit,
    })
}

pub(super) fn check_inputs(k_nodes: usize, ac_nodes: usize, iterations: usize, v0: &[C64]) -> Result<()> {
    if ac_nodes != k_nodes {
        return Err(Error::Dimension(format!("consensus has {ac_nodes} nodes, data has {k_nodes}")));
    }
    if v0.len() != k_nodes {
        return Err(Error::Dimension(format!("start vector length {} != K={k_nodes}", v0.len())));
    }
    if iterations == 0 {
        return Err(Error::InvalidArgument("need at least one iteration".into()));
    }
    if v0.iter().all(|x| *x == C64::new(0.0, 0.0)) {
        return Err(Error::InvalidArgument("start vector is zero".into()));
    }
    Ok(())
}

pub(super) fn vector_input(nodes: &[NodeState], n: usize) -> CMatrix {
    let mut z0 = CMatrix::zeros(nodes.len(), n);
    for (k, s) in nodes.iter().enumerate() {
        z0.row_mut(k).copy_from_slice(&s.vector_input());
    }
    z0
}

fn scalar_input(nodes: &[NodeState]) -> CMatrix {
    CMatrix::from_fn(nodes.len(), 1, |k, _| C64::new(nodes[k].v_cur.norm_sqr(), 0.0))
}

fn rayleigh(nodes: &mut [NodeState], z: &CMatrix, d: &CMatrix) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(nodes.len());
    for (k, s) in nodes.iter_mut().enumerate() {
        let l = s
            .rayleigh_estimate(z.row(k), d[(k, 0)])
            .ok_or_else(|| Error::Degenerate(format!("scalar consensus returned 0 at node {k}")))?;
        s.lambda_est.push(l);
        out.push(l);
    }
    Ok(out)
}

/// Estimate for the current `v`, reusing the vector consensus `z` that the
/// next iteration needs anyway.
fn estimate(nodes: &mut [NodeState], ac: &mut dyn Consensus, z: &CMatrix) -> Result<Vec<f64>> {
    let s0 = scalar_input(nodes);
    let sres = ac.run(&s0)?;
    rayleigh(nodes, z, &sres.z_t)
}
