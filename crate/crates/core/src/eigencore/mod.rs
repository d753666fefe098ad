//! Centralized reference algorithms.
//!
//! These are the fusion-center counterparts of the decentralized routines in
//! [`crate::dec_eig`]: the sample covariance, the power method, the Lanczos
//! recursion, Sturm-sequence bisection for tridiagonal spectra, a cyclic
//! Jacobi eigensolver used as the dense oracle, and Ritz-value filtering.

mod jacobi;
mod lanczos;
mod power;
mod spurious;
mod tridiagonal;

pub use jacobi::{dense_hermitian_eig, EigenSolution};
pub use lanczos::{lanczos, lanczos_with_tolerance, LanczosOutput, DEFAULT_BREAKDOWN_REL};
pub use power::{power_method, power_method_with_guard, PowerMethodOutput, DEFAULT_MAX_NORM};
pub use spurious::{cullum_willoughby, filter_ritz_sequence, filter_spurious, ZERO_REL};
pub use tridiagonal::{sturm_count, tridiagonal_eigenvalues, Tridiagonal};

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, C64};

/// Received samples: row `k` holds the `N` samples of node `k`.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleMatrix(CMatrix);

impl SampleMatrix {
    pub fn new(y: CMatrix) -> Result<Self> {
        if y.rows() == 0 || y.cols() == 0 {
            return Err(Error::InvalidArgument(
                "sample matrix needs K >= 1 and N >= 1".into(),
            ));
        }
        if y.as_slice().iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidArgument("non-finite sample".into()));
        }
        Ok(Self(y))
    }

    pub fn nodes(&self) -> usize {
        self.0.rows()
    }

    pub fn samples(&self) -> usize {
        self.0.cols()
    }

    pub fn row(&self, k: usize) -> &[C64] {
        self.0.row(k)
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self(self.0.scale(s))
    }
}

/// `R = (1/N) Y Yᴴ`.
#[derive(Clone, Debug, PartialEq)]
pub struct CovarianceMatrix(CMatrix);

impl CovarianceMatrix {
    /// Wraps an arbitrary Hermitian matrix, e.g. for tests of the
    /// eigen-solvers on hand-built inputs.
    pub fn from_hermitian(r: CMatrix) -> Result<Self> {
        let scale = r.frobenius_norm();
        let defect = r.hermitian_defect();
        if r.rows() != r.cols() || defect > 1e-12 * scale.max(1e-300) {
            return Err(Error::NotHermitian(defect));
        }
        Ok(Self(r))
    }

    pub fn dim(&self) -> usize {
        self.0.rows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        self.0.matvec(v)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.frobenius_norm()
    }

    /// `vᴴ R v`, real for Hermitian `R`.
    pub fn quadratic_form(&self, v: &[C64]) -> f64 {
        crate::linalg::dot_conj(v, &self.apply(v)).re
    }
}

pub fn sample_covariance(y: &SampleMatrix) -> CovarianceMatrix {
    let m = y.matrix();
    let n = m.cols() as f64;
    let mut r = m.matmul(&m.adjoint()).scale(1.0 / n);
    // Exact Hermitian symmetry; the product is only symmetric up to rounding.
    for i in 0..r.rows() {
        r[(i, i)] = C64::new(r[(i, i)].re, 0.0);
        for j in 0..i {
            r[(i, j)] = r[(j, i)].conj();
        }
    }
    CovarianceMatrix(r)
}

/// Descending eigenvalues of `R = (1/N) Y Yᴴ`.
///
/// When `N < K` the nonzero spectrum is taken from the smaller `N x N` Gram
/// matrix `(1/N) Yᴴ Y` and padded with zeros, which is exact and much cheaper
/// for the Monte-Carlo harness.
pub fn covariance_spectrum(y: &SampleMatrix) -> Vec<f64> {
    let (k, n) = (y.nodes(), y.samples());
    if n >= k {
        return dense_hermitian_eig(sample_covariance(y).matrix())
            .expect("sample covariance is Hermitian")
            .values;
    }
    let m = y.matrix();
    let mut g = m.adjoint().matmul(m).scale(1.0 / n as f64);
    for i in 0..n {
        g[(i, i)] = C64::new(g[(i, i)].re, 0.0);
        for j in 0..i {
            g[(i, j)] = g[(j, i)].conj();
        }
    }
    let mut values = dense_hermitian_eig(&g).expect("Gram matrix is Hermitian").values;
    values.resize(k, 0.0);
    values
}

/// Stable descending sort; ties keep their input order.
pub(crate) fn sort_descending(values: &mut [f64]) {
    values.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::real;

    #[test]
    fn covariance_of_identity_samples() {
        let y = SampleMatrix::new(CMatrix::identity(3)).unwrap();
        let r = sample_covariance(&y);
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 1.0 / 3.0 } else { 0.0 };
                assert!((r.matrix()[(i, j)] - real(want)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn covariance_of_all_ones() {
        let y = SampleMatrix::new(CMatrix::from_real(2, 2, &[1.0; 4])).unwrap();
        let r = sample_covariance(&y);
        for z in r.matrix().as_slice() {
            assert!((z - real(1.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn empty_or_non_finite_samples_rejected() {
        assert!(SampleMatrix::new(CMatrix::zeros(0, 3)).is_err());
        let mut m = CMatrix::zeros(2, 2);
        m[(0, 0)] = real(f64::NAN);
        assert!(SampleMatrix::new(m).is_err());
    }

    #[test]
    fn gram_spectrum_matches_full_spectrum() {
        let y = CMatrix::from_fn(6, 3, |i, j| C64::new((i * 3 + j) as f64 * 0.1 - 0.7, (i as f64 - j as f64).sin()));
        let y = SampleMatrix::new(y).unwrap();
        let fast = covariance_spectrum(&y);
        let full = dense_hermitian_eig(sample_covariance(&y).matrix()).unwrap().values;
        assert_eq!(fast.len(), 6);
        for (a, b) in fast.iter().zip(&full) {
            assert!((a - b).abs() < 1e-12 * (1.0 + full[0]), "{fast:?} vs {full:?}");
        }
    }
}
