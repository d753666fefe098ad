use crate::linalg::CMatrix;

use super::sort_descending;

/// Symmetric tridiagonal matrix from the Lanczos coefficients.
///
/// `alpha[i]` is the diagonal and `beta[i]` couples rows `i` and `i + 1`, so
/// `beta.len() == alpha.len() - 1` (the recursion's `β(1) = 0` is not stored).
#[derive(Clone, Debug, PartialEq, Default)]
pub struct Tridiagonal {
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
}

impl Tridiagonal {
    pub fn new(alpha: Vec<f64>, beta: Vec<f64>) -> Self {
        assert!(
            beta.len() + 1 == alpha.len() || (alpha.is_empty() && beta.is_empty()),
            "tridiagonal needs beta.len() == alpha.len() - 1"
        );
        Self { alpha, beta }
    }

    pub fn size(&self) -> usize {
        self.alpha.len()
    }

    /// Leading `j x j` block.
    pub fn leading(&self, j: usize) -> Self {
        let j = j.min(self.size());
        Self {
            alpha: self.alpha[..j].to_vec(),
            beta: self.beta[..j.saturating_sub(1)].to_vec(),
        }
    }

    /// The matrix with its first row and column removed.
    pub fn without_first(&self) -> Self {
        if self.size() <= 1 {
            return Self::default();
        }
        Self {
            alpha: self.alpha[1..].to_vec(),
            beta: self.beta[1..].to_vec(),
        }
    }

    pub fn inf_norm(&self) -> f64 {
        let n = self.size();
        (0..n)
            .map(|i| {
                let left = if i > 0 { self.beta[i - 1].abs() } else { 0.0 };
                let right = if i + 1 < n { self.beta[i].abs() } else { 0.0 };
                self.alpha[i].abs() + left + right
            })
            .fold(0.0, f64::max)
    }

    pub fn to_dense(&self) -> CMatrix {
        let n = self.size();
        let mut m = CMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)].re = self.alpha[i];
            if i + 1 < n {
                m[(i, i + 1)].re = self.beta[i];
                m[(i + 1, i)].re = self.beta[i];
            }
        }
        m
    }

    fn gershgorin(&self) -> (f64, f64) {
        let n = self.size();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let left = if i > 0 { self.beta[i - 1].abs() } else { 0.0 };
            let right = if i + 1 < n { self.beta[i].abs() } else { 0.0 };
            lo = lo.min(self.alpha[i] - left - right);
            hi = hi.max(self.alpha[i] + left + right);
        }
        (lo, hi)
    }
}

const PIVOT_GUARD: f64 = 1e-300;
const BISECTION_REL_TOL: f64 = 1e-14;

/// Number of eigenvalues strictly below `x` (negative pivots of `T - xI = LDLᵀ`).
pub fn sturm_count(t: &Tridiagonal, x: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0;
    for i in 0..t.size() {
        let coupling = if i > 0 { t.beta[i - 1] * t.beta[i - 1] / q } else { 0.0 };
        q = t.alpha[i] - x - coupling;
        if q.abs() < PIVOT_GUARD {
            q = if q < 0.0 { -PIVOT_GUARD } else { PIVOT_GUARD };
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// All eigenvalues of `t`, descending, by Sturm-count bisection inside the
/// Gershgorin interval.
///
/// Each interval is halved until its width is below `1e-14·(1 + ‖T‖∞)`.
pub fn tridiagonal_eigenvalues(t: &Tridiagonal) -> Vec<f64> {
    let n = t.size();
    if n == 0 {
        return Vec::new();
    }
    let (glo, ghi) = t.gershgorin();
    let tol = BISECTION_REL_TOL * (1.0 + t.inf_norm());
    let mut out = Vec::with_capacity(n);
    let mut floor = glo - tol;
    for i in 0..n {
        // smallest x with count(x) > i
        let mut lo = floor;
        let mut hi = ghi + tol;
        while hi - lo > tol {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if sturm_count(t, mid) > i {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let value = 0.5 * (lo + hi);
        out.push(value);
        floor = lo;
    }
    sort_descending(&mut out);
    out
}
