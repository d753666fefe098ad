use crate::consensus::Consensus;
use crate::eigencore::{
    cullum_willoughby, filter_ritz_sequence, tridiagonal_eigenvalues, SampleMatrix, Tridiagonal, DEFAULT_BREAKDOWN_REL,
};
use crate::error::{Error, Result};
use crate::linalg::{norm, CMatrix, C64};

use super::analysis::{measured_w_error, predict_dla_w_error};
use super::audit::MessageAudit;
use super::dpm::{check_inputs, vector_input};
use super::node::NodeState;

#[derive(Clone, Debug, PartialEq)]
pub struct DlaOptions {
    /// Breakdown when `β(j+1)[k] < breakdown_rel · (‖T_j[k]‖∞ + β(j+1)[k])`.
    pub breakdown_rel: f64,
    /// Spurious-value tolerance, relative to the largest Ritz value.
    pub spurious_tol_rel: f64,
    /// Apply the rank and duplicate filter to the Ritz values.
    pub filter: bool,
    /// Use the Cullum–Willoughby test to produce Ritz values.
    pub cullum_willoughby: bool,
    /// Keep filtered Ritz values for every `j ≤ M`.
    pub track_history: bool,
}

impl Default for DlaOptions {
    fn default() -> Self {
        Self {
            breakdown_rel: DEFAULT_BREAKDOWN_REL,
            spurious_tol_rel: 1e-6,
            filter: true,
            cullum_willoughby: false,
            track_history: false,
        }
    }
}

/// Consensus errors realized during a DLA run, indexed by `j − 1`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct DlaErrorTrace {
    /// `E^(I)(j)`, K×N.
    pub e_i: Vec<CMatrix>,
    /// `e^(II)(j)`: error of the scalar consensus on `|w(j)[k]|²`.
    pub e_ii: Vec<Vec<C64>>,
    /// Measured `w(j) − w_ideal(j)`, where the ideal step uses the actual
    /// `v(j)`, `v(j−1)` and `‖w(j−1)‖`.
    pub e_w: Vec<Vec<C64>>,
    /// First-order prediction of `e_w`.
    pub e_w_pred: Vec<Vec<C64>>,
    /// Set where the scalar error is too large for the first-order model.
    pub taylor_violation: Vec<bool>,
}

#[derive(Clone, Debug)]
pub struct DlaOutput {
    pub tridiagonals: Vec<Tridiagonal>,
    /// Per-node eigenvalue estimates, descending.
    pub eigenvalues: Vec<Vec<f64>>,
    /// `ritz_history[j−1][k]`; empty unless requested.
    pub ritz_history: Vec<Vec<Vec<f64>>>,
    pub nodes: Vec<NodeState>,
    /// `v(1), …, v(J)` for the `J` executed iterations.
    pub v_history: Vec<Vec<C64>>,
    pub w_history: Vec<Vec<C64>>,
    pub trace: DlaErrorTrace,
    pub audit: MessageAudit,
}

impl DlaOutput {
    pub fn clamped(&self) -> Vec<bool> {
        self.nodes.iter().map(|s| s.clamped).collect()
    }

    pub fn breakdown(&self) -> Vec<Option<usize>> {
        self.nodes.iter().map(|s| s.frozen_at).collect()
    }
}

/// `v(1) = 1/√K`.
pub fn default_dla_start(nodes: usize) -> Vec<C64> {
    vec![C64::new(1.0 / (nodes as f64).sqrt(), 0.0); nodes]
}

pub fn dla_run(y: &SampleMatrix, ac: &mut dyn Consensus, iterations: usize, v1: &[C64]) -> Result<DlaOutput> {
    dla_run_with(y, ac, iterations, v1, &DlaOptions::default())
}

/// Decentralized Lanczos algorithm.
///
/// Iteration `j` runs a width-N consensus on `v(j)[k]* y_kᵀ`, giving each node
/// `α(j)[k]` and `w(j)[k]`, then a scalar consensus on `|w(j)[k]|²` giving
/// `β(j+1)[k]`. Node `k` ends with its own tridiagonal `T[k]` and takes its
/// eigenvalues as estimates of the spectrum of `R`.
pub fn dla_run_with(
    y: &SampleMatrix,
    ac: &mut dyn Consensus,
    iterations: usize,
    v1: &[C64],
    opts: &DlaOptions,
) -> Result<DlaOutput> {
    let k_nodes = y.nodes();
    let n = y.samples();
    check_inputs(k_nodes, ac.node_count(), iterations, v1)?;
    if iterations > k_nodes {
        return Err(Error::InvalidArgument(format!("DLA needs M <= K, got M={iterations}, K={k_nodes}")));
    }
    if (norm(v1) - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidArgument("DLA start vector must have unit norm".into()));
    }

    let mut nodes: Vec<NodeState> = (0..k_nodes).map(|k| NodeState::new(k, y.row(k), k_nodes, v1[k])).collect();
    let mut audit = MessageAudit::new(k_nodes);
    let mut trace = DlaErrorTrace::default();
    let mut v_history: Vec<Vec<C64>> = Vec::new();
    let mut w_history: Vec<Vec<C64>> = Vec::new();
    let mut v_prev_global = vec![C64::new(0.0, 0.0); k_nodes];

    for j in 1..=iterations {
        if nodes.iter().all(NodeState::is_frozen) {
            break;
        }
        let v_global: Vec<C64> = nodes.iter().map(|s| s.v_cur).collect();
        let z0 = vector_input(&nodes, n);
        let res = ac.run(&z0)?;
        audit.record(&res, true);
        for (k, s) in nodes.iter_mut().enumerate() {
            if s.is_frozen() {
                s.w = C64::new(0.0, 0.0);
            } else {
                s.lanczos_residual(res.z_t.row(k));
            }
        }
        let w: Vec<C64> = nodes.iter().map(|s| s.w).collect();
        let w_prev_norm = w_history.last().map_or(0.0, |x| norm(x));
        trace.e_w.push(measured_w_error(y, &v_global, &v_prev_global, w_prev_norm, &w));
        trace.e_i.push(res.error);
        v_history.push(v_global.clone());
        w_history.push(w);

        let s0 = CMatrix::from_fn(k_nodes, 1, |k, _| C64::new(nodes[k].w.norm_sqr(), 0.0));
        let sres = ac.run(&s0)?;
        audit.record(&sres, false);
        trace.e_ii.push(sres.error.col(0));

        for (k, s) in nodes.iter_mut().enumerate() {
            if s.is_frozen() {
                continue;
            }
            let beta = s.lanczos_beta(sres.z_t[(k, 0)]);
            if j == iterations {
                continue;
            }
            let scale = local_t(s).inf_norm() + beta;
            if beta < opts.breakdown_rel * scale || beta == 0.0 {
                s.freeze();
            } else {
                s.lanczos_advance(beta);
            }
        }
        v_prev_global = v_global;
    }

    for j in 1..=trace.e_i.len() {
        let p = predict_dla_w_error(y, &trace, &v_history, &w_history, j)?;
        trace.e_w_pred.push(p.predicted);
        trace.taylor_violation.push(p.taylor_violation);
    }

    let tridiagonals: Vec<Tridiagonal> = nodes.iter().map(local_t).collect();
    let executed = v_history.len();
    let (eigenvalues, ritz_history) = if opts.track_history {
        let per_node: Vec<Vec<Vec<f64>>> = tridiagonals.iter().map(|t| ritz_sequence(t, k_nodes, n, opts)).collect();
        let history = (1..=executed)
            .map(|j| per_node.iter().map(|seq| seq[j.min(seq.len()) - 1].clone()).collect())
            .collect();
        (per_node.into_iter().map(|mut seq| seq.pop().unwrap_or_default()).collect(), history)
    } else {
        let last = tridiagonals
            .iter()
            .map(|t| ritz_sequence(t, k_nodes, n, opts).pop().unwrap_or_default())
            .collect();
        (last, Vec::new())
    };

    Ok(DlaOutput {
        tridiagonals,
        eigenvalues,
        ritz_history,
        nodes,
        v_history,
        w_history,
        trace,
        audit,
    })
}

fn local_t(s: &NodeState) -> Tridiagonal {
    Tridiagonal::new(s.alpha_hist.clone(), s.beta_hist[1..s.alpha_hist.len()].to_vec())
}

fn raw_ritz(t: &Tridiagonal, opts: &DlaOptions) -> Vec<f64> {
    if opts.cullum_willoughby {
        let scale = t.inf_norm().max(f64::MIN_POSITIVE);
        cullum_willoughby(t, opts.spurious_tol_rel * scale)
    } else {
        tridiagonal_eigenvalues(t)
    }
}

/// Estimates for every leading block `1..=size` of `t`.
fn ritz_sequence(t: &Tridiagonal, nodes: usize, samples: usize, opts: &DlaOptions) -> Vec<Vec<f64>> {
    let raw: Vec<Vec<f64>> = (1..=t.size()).map(|j| raw_ritz(&t.leading(j), opts)).collect();
    if opts.filter {
        filter_ritz_sequence(&raw, nodes, samples, opts.spurious_tol_rel)
    } else {
        raw
    }
}
