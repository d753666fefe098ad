//! Closed-form consensus-error propagation and its checks.

use crate::eigencore::{CovarianceMatrix, EigenSolution, SampleMatrix};
use crate::error::{Error, Result};
use crate::linalg::{dot_conj, inf_norm, norm, norm_sq, C64};

use super::dla::DlaErrorTrace;
use super::dpm::DpmErrorTrace;

/// `u = Yᴴ v`.
fn y_adjoint_times(y: &SampleMatrix, v: &[C64]) -> Vec<C64> {
    let m = y.matrix();
    let mut u = vec![C64::new(0.0, 0.0); y.samples()];
    for (k, vk) in v.iter().enumerate() {
        for (un, ykn) in u.iter_mut().zip(m.row(k)) {
            *un += ykn.conj() * vk;
        }
    }
    u
}

/// `R v = (1/N) Y Yᴴ v`.
fn r_times(y: &SampleMatrix, u: &[C64]) -> Vec<C64> {
    let n = y.samples() as f64;
    (0..y.nodes())
        .map(|k| y.row(k).iter().zip(u).map(|(a, b)| a * b).sum::<C64>() / n)
        .collect()
}

/// Vector-consensus contribution to a node's quadratic estimate:
/// `(K/N)·2 Re(e[k]ᵀ u) + (K²/N)‖e[k]‖²`.
fn quadratic_error(e: &[C64], u: &[C64], k_nodes: f64, n: f64) -> f64 {
    let cross: C64 = e.iter().zip(u).map(|(a, b)| a * b).sum();
    2.0 * cross.re * k_nodes / n + norm_sq(e) * k_nodes * k_nodes / n
}

/// `v(M)` predicted from the recorded errors: `R^M v0 + Σ_j R^(M−j) d(j)`.
///
/// The DPM iterate is linear in the errors, so this is exact up to rounding.
pub fn predict_dpm_vector_error(r: &CovarianceMatrix, trace: &DpmErrorTrace, v0: &[C64]) -> Vec<C64> {
    let mut x = v0.to_vec();
    for d in &trace.d {
        x = r.apply(&x).iter().zip(d).map(|(a, b)| a + b).collect();
    }
    x
}

#[derive(Clone, Debug, PartialEq)]
pub struct Lambda1ErrorPrediction {
    /// Numerator error per node.
    pub e_num: Vec<f64>,
    /// Denominator error per node.
    pub e_den: Vec<C64>,
    /// `Re[(v_Mᴴ R v_M + e_num) / (v_Mᴴ v_M + e_den)]`.
    pub lambda: Vec<f64>,
}

/// Reconstructs each node's final DPM estimate from the final-stage errors
/// and the iterate `v_m` the network actually reached.
pub fn predict_lambda1_error(y: &SampleMatrix, trace: &DpmErrorTrace, v_m: &[C64]) -> Result<Lambda1ErrorPrediction> {
    let k_nodes = y.nodes();
    if v_m.len() != k_nodes || trace.e2.rows() != k_nodes || trace.e3.len() != k_nodes {
        return Err(Error::Dimension("trace does not match the sample matrix".into()));
    }
    let (kf, nf) = (k_nodes as f64, y.samples() as f64);
    let u = y_adjoint_times(y, v_m);
    let quad = norm_sq(&u) / nf;
    let vv = norm_sq(v_m);
    let e_num: Vec<f64> = (0..k_nodes).map(|k| quadratic_error(trace.e2.row(k), &u, kf, nf)).collect();
    let e_den: Vec<C64> = trace.e3.iter().map(|e| e * kf).collect();
    let lambda = e_num.iter().zip(&e_den).map(|(n, d)| (C64::new(quad + n, 0.0) / (vv + d)).re).collect();
    Ok(Lambda1ErrorPrediction { e_num, e_den, lambda })
}

/// `w(j) − w_ideal(j)` with
/// `w_ideal = R v − (vᴴ R v) v − ‖w(j−1)‖ v(j−1)`.
pub(crate) fn measured_w_error(
    y: &SampleMatrix,
    v: &[C64],
    v_prev: &[C64],
    w_prev_norm: f64,
    w: &[C64],
) -> Vec<C64> {
    let u = y_adjoint_times(y, v);
    let rv = r_times(y, &u);
    let alpha = dot_conj(v, &rv).re;
    (0..v.len())
        .map(|k| w[k] - (rv[k] - v[k] * alpha - v_prev[k] * w_prev_norm))
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct WErrorPrediction {
    pub predicted: Vec<C64>,
    /// Some node's scalar error exceeded `0.1 ‖w(j−1)‖²/K`, where the
    /// square-root linearization stops being trustworthy.
    pub taylor_violation: bool,
}

/// First-order model of the Lanczos residual error at iteration `j`
/// (1-based):
///
/// ```text
/// e_w(j)[k] ≈ (K/N) e(j)[k]ᴴ y_k
///           − [(K/N)·2Re(e(j)[k]ᵀ Yᴴ v(j)) + (K²/N)‖e(j)[k]‖²] v(j)[k]
///           − K e^(II)(j−1)[k] / (2‖w(j−1)‖) · v(j−1)[k]
/// ```
///
/// The last term comes from the scalar consensus that produced `β(j)`.
pub fn predict_dla_w_error(
    y: &SampleMatrix,
    trace: &DlaErrorTrace,
    v_history: &[Vec<C64>],
    w_history: &[Vec<C64>],
    j: usize,
) -> Result<WErrorPrediction> {
    if j == 0 || j > trace.e_i.len() || j > v_history.len() {
        return Err(Error::InvalidArgument(format!("iteration {j} is outside the recorded run")));
    }
    let k_nodes = y.nodes();
    let (kf, nf) = (k_nodes as f64, y.samples() as f64);
    let v = &v_history[j - 1];
    let e = &trace.e_i[j - 1];
    let u = y_adjoint_times(y, v);
    let mut predicted: Vec<C64> = (0..k_nodes)
        .map(|k| {
            let first: C64 = e.row(k).iter().zip(y.row(k)).map(|(a, b)| a.conj() * b).sum::<C64>() * (kf / nf);
            first - v[k] * quadratic_error(e.row(k), &u, kf, nf)
        })
        .collect();
    let mut taylor_violation = false;
    if j >= 2 {
        let w_prev = &w_history[j - 2];
        let wn = norm(w_prev);
        let v_prev = &v_history[j - 2];
        let e_ii = &trace.e_ii[j - 2];
        if wn > 0.0 {
            for k in 0..k_nodes {
                let eb = kf * e_ii[k].re / (2.0 * wn);
                predicted[k] -= v_prev[k] * eb;
                if e_ii[k].norm() > 0.1 * wn * wn / kf {
                    taylor_violation = true;
                }
            }
        }
    }
    Ok(WErrorPrediction {
        predicted,
        taylor_violation,
    })
}

/// Alignment of the DPM iterates with the dominant eigenvector, next to
/// the size of the injected per-iteration errors.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceTrace {
    /// `sin θ(j)` for `j = 0..M`.
    pub sin_theta: Vec<f64>,
    /// `‖d(j)‖∞` for `j = 1..M`.
    pub d_inf: Vec<f64>,
}

impl ConvergenceTrace {
    pub fn from_run(v_history: &[Vec<C64>], d: &[Vec<C64>], u1: &[C64]) -> Self {
        let u_norm = norm(u1);
        let sin_theta = v_history
            .iter()
            .map(|v| {
                let vn = norm(v);
                if vn == 0.0 || u_norm == 0.0 {
                    return 1.0;
                }
                let c = (dot_conj(u1, v).norm() / (vn * u_norm)).min(1.0);
                (1.0 - c * c).max(0.0).sqrt()
            })
            .collect();
        Self {
            sin_theta,
            d_inf: d.iter().map(|x| inf_norm(x)).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceVerdict {
    /// `λ1 / max(λ2, 1)`.
    pub rate: f64,
    /// `‖d(j)‖∞ / (rate^j / (j+1))` for `j = 1..M`.
    pub ratios: Vec<f64>,
    pub condition_holds: bool,
}

/// Checks whether the injected errors decay fast enough for the DPM to
/// converge: `‖d(j)‖∞` must eventually fall well under `rate^j / (j+1)`.
///
/// The condition is judged to hold when the last ratio is at most a tenth
/// of the largest one, or when every error is zero.
pub fn check_dpm_convergence_condition(
    trace: &ConvergenceTrace,
    spectrum: &EigenSolution,
) -> Result<ConvergenceVerdict> {
    let lambda1 = spectrum.values.first().copied().unwrap_or(0.0);
    let lambda2 = spectrum.values.get(1).copied().unwrap_or(0.0);
    if lambda1 <= 1.0 {
        return Err(Error::Precondition(format!("needs λ1 > 1, got {lambda1}")));
    }
    if trace.sin_theta.first().is_some_and(|s| *s >= 1.0 - 1e-12) {
        return Err(Error::Precondition("start vector is orthogonal to the dominant eigenvector".into()));
    }
    let rate = lambda1 / lambda2.max(1.0);
    let ln_rate = rate.ln();
    let ratios: Vec<f64> = trace
        .d_inf
        .iter()
        .enumerate()
        .map(|(i, &d)| {
            if d == 0.0 {
                return 0.0;
            }
            let j = (i + 1) as f64;
            (d.ln() - j * ln_rate + (j + 1.0).ln()).exp()
        })
        .collect();
    let max = ratios.iter().copied().fold(0.0, f64::max);
    let condition_holds = max == 0.0 || ratios.last().is_some_and(|l| *l <= 0.1 * max);
    Ok(ConvergenceVerdict {
        rate,
        ratios,
        condition_holds,
    })
}
