use crate::error::{Error, Result};
use crate::linalg::{dot_conj, norm, C64};

use super::{CovarianceMatrix, Tridiagonal};

/// Default breakdown guard relative to the running `‖T‖∞`.
pub const DEFAULT_BREAKDOWN_REL: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct LanczosOutput {
    pub t: Tridiagonal,
    /// Set when a vanishing `β` ended the recursion early: the Krylov space
    /// is an exact invariant subspace and `t` has fewer than `M` rows.
    pub breakdown: bool,
}

pub fn lanczos(r: &CovarianceMatrix, v1: &[C64], iterations: usize) -> Result<LanczosOutput> {
    lanczos_with_tolerance(r, v1, iterations, DEFAULT_BREAKDOWN_REL)
}

/// Lanczos recursion without reorthogonalization:
///
/// ```text
/// α(j)   = v(j)ᴴ R v(j)
/// w(j)   = R v(j) − α(j) v(j) − β(j) v(j−1)
/// β(j+1) = ‖w(j)‖
/// v(j+1) = w(j) / β(j+1)
/// ```
///
/// with `β(1) = 0`. Breakdown is declared when `β(j+1)` drops below
/// `breakdown_rel · ‖T_j‖∞`.
pub fn lanczos_with_tolerance(
    r: &CovarianceMatrix,
    v1: &[C64],
    iterations: usize,
    breakdown_rel: f64,
) -> Result<LanczosOutput> {
    let k = r.dim();
    if v1.len() != k {
        return Err(Error::Dimension(format!("start vector length {} != {}", v1.len(), k)));
    }
    if iterations == 0 || iterations > k {
        return Err(Error::InvalidArgument(format!(
            "Lanczos needs 1 <= M <= K, got M={iterations}, K={k}"
        )));
    }
    if (norm(v1) - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidArgument("Lanczos start vector must have unit norm".into()));
    }

    let mut alpha = Vec::with_capacity(iterations);
    let mut beta: Vec<f64> = Vec::with_capacity(iterations);
    let mut v_prev = vec![C64::new(0.0, 0.0); k];
    let mut v = v1.to_vec();
    let mut beta_j = 0.0;
    let mut breakdown = false;

    for j in 1..=iterations {
        let rv = r.apply(&v);
        let a = dot_conj(&v, &rv).re;
        alpha.push(a);
        if j == iterations {
            break;
        }
        let w: Vec<C64> = rv
            .iter()
            .zip(&v)
            .zip(&v_prev)
            .map(|((x, vj), vp)| x - vj * a - vp * beta_j)
            .collect();
        let b = norm(&w);
        let scale = Tridiagonal::new(alpha.clone(), beta.clone()).inf_norm() + b;
        if b < breakdown_rel * scale || b == 0.0 {
            breakdown = true;
            break;
        }
        beta.push(b);
        v_prev = std::mem::replace(&mut v, w.iter().map(|x| x / b).collect());
        beta_j = b;
    }
    Ok(LanczosOutput {
        t: Tridiagonal::new(alpha, beta),
        breakdown,
    })
}
