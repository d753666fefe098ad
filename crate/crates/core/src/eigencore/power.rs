use crate::error::{Error, Result};
use crate::linalg::{dot_conj, norm, C64};

use super::CovarianceMatrix;

/// Default magnitude above which the iterate is renormalized.
pub const DEFAULT_MAX_NORM: f64 = 1e100;

/// Result of `M` unnormalized power iterations.
///
/// The true iterate `R^M v0` equals `vector * exp(log_scale)`; `log_scale` is
/// zero unless the overflow guard fired.
#[derive(Clone, Debug)]
pub struct PowerMethodOutput {
    pub vector: Vec<C64>,
    pub log_scale: f64,
    pub lambda: f64,
}

pub fn power_method(r: &CovarianceMatrix, v0: &[C64], iterations: usize) -> Result<PowerMethodOutput> {
    power_method_with_guard(r, v0, iterations, DEFAULT_MAX_NORM)
}

/// `v_M = R^M v0` and the Rayleigh quotient `v_Mᴴ R v_M / v_Mᴴ v_M`.
pub fn power_method_with_guard(
    r: &CovarianceMatrix,
    v0: &[C64],
    iterations: usize,
    max_norm: f64,
) -> Result<PowerMethodOutput> {
    if v0.len() != r.dim() {
        return Err(Error::Dimension(format!(
            "start vector has length {}, matrix is {}x{}",
            v0.len(),
            r.dim(),
            r.dim()
        )));
    }
    if iterations == 0 {
        return Err(Error::InvalidArgument("power method needs M >= 1".into()));
    }
    if norm(v0) == 0.0 {
        return Err(Error::InvalidArgument("zero start vector".into()));
    }
    let mut v = v0.to_vec();
    let mut log_scale = 0.0;
    for _ in 0..iterations {
        v = r.apply(&v);
        let nv = norm(&v);
        if nv > max_norm {
            v.iter_mut().for_each(|x| *x /= nv);
            log_scale += nv.ln();
        }
    }
    let den = dot_conj(&v, &v).re;
    if den == 0.0 {
        return Err(Error::Degenerate("power iterate vanished (v0 in null space)".into()));
    }
    let lambda = r.quadratic_form(&v) / den;
    Ok(PowerMethodOutput {
        vector: v,
        log_scale,
        lambda,
    })
}
