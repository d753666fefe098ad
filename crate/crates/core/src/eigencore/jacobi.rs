use crate::error::{Error, Result};
use crate::linalg::{CMatrix, C64};

/// Eigenvalues sorted descending with optional orthonormal eigenvector columns.
#[derive(Clone, Debug)]
pub struct EigenSolution {
    pub values: Vec<f64>,
    pub vectors: Option<CMatrix>,
}

impl EigenSolution {
    /// Column `i` of the eigenvector matrix.
    pub fn vector(&self, i: usize) -> Option<Vec<C64>> {
        self.vectors.as_ref().map(|v| v.col(i))
    }
}

const MAX_SWEEPS: usize = 100;
const OFF_TOL: f64 = 1e-12;

fn off_norm(a: &CMatrix) -> f64 {
    let n = a.rows();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                acc += a[(i, j)].norm_sqr();
            }
        }
    }
    acc.sqrt()
}

/// Full Hermitian eigendecomposition by cyclic complex Jacobi rotations.
///
/// Each rotation first removes the phase of `a_pq` and then applies the real
/// symmetric Jacobi rotation, so `A ← Jᴴ A J` with `J = D·G` unitary. Sweeps
/// stop once the off-diagonal Frobenius norm is below `1e-12·‖A‖_F`.
pub fn dense_hermitian_eig(a: &CMatrix) -> Result<EigenSolution> {
    let n = a.rows();
    if n != a.cols() {
        return Err(Error::Dimension(format!("{}x{} is not square", n, a.cols())));
    }
    let scale = a.frobenius_norm();
    let defect = a.hermitian_defect();
    if defect > 1e-12 * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::NotHermitian(defect));
    }

    let mut a = a.clone();
    let mut v = CMatrix::identity(n);
    let target = OFF_TOL * scale;

    for _ in 0..MAX_SWEEPS {
        if off_norm(&a) <= target {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let mag = apq.norm();
                if mag <= f64::MIN_POSITIVE || mag <= 1e-18 * scale {
                    continue;
                }
                let phase = apq / mag;
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let theta = (aqq - app) / (2.0 * mag);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // J = D G with D = diag(1, conj(phase)) at (p, q).
                let u00 = C64::new(c, 0.0);
                let u01 = C64::new(s, 0.0);
                let u10 = -phase.conj() * s;
                let u11 = phase.conj() * c;
                rotate(&mut a, &mut v, p, q, [u00, u01, u10, u11]);
                a[(p, q)] = C64::new(0.0, 0.0);
                a[(q, p)] = C64::new(0.0, 0.0);
                a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
                a[(q, q)] = C64::new(a[(q, q)].re, 0.0);
            }
        }
    }

    let diag: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| diag[j].partial_cmp(&diag[i]).unwrap_or(std::cmp::Ordering::Equal));
    let values = order.iter().map(|&i| diag[i]).collect();
    let vectors = CMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    Ok(EigenSolution {
        values,
        vectors: Some(vectors),
    })
}

fn rotate(a: &mut CMatrix, v: &mut CMatrix, p: usize, q: usize, u: [C64; 4]) {
    let [u00, u01, u10, u11] = u;
    let n = a.rows();
    for i in 0..n {
        let (x, y) = (a[(i, p)], a[(i, q)]);
        a[(i, p)] = x * u00 + y * u10;
        a[(i, q)] = x * u01 + y * u11;
        let (x, y) = (v[(i, p)], v[(i, q)]);
        v[(i, p)] = x * u00 + y * u10;
        v[(i, q)] = x * u01 + y * u11;
    }
    for i in 0..n {
        let (x, y) = (a[(p, i)], a[(q, i)]);
        a[(p, i)] = u00.conj() * x + u10.conj() * y;
        a[(q, i)] = u01.conj() * x + u11.conj() * y;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{norm, real};

    fn residual(a: &CMatrix, sol: &EigenSolution) -> f64 {
        let v = sol.vectors.as_ref().unwrap();
        let mut worst: f64 = 0.0;
        for (i, &lam) in sol.values.iter().enumerate() {
            let u = v.col(i);
            let au = a.matvec(&u);
            let r: Vec<C64> = au.iter().zip(&u).map(|(x, y)| x - y * lam).collect();
            worst = worst.max(norm(&r));
        }
        worst
    }

    #[test]
    fn diagonal_input() {
        let a = CMatrix::from_real(3, 3, &[1.0, 0.0, 0.0, 0.0, 3.0, 0.0, 0.0, 0.0, 2.0]);
        let sol = dense_hermitian_eig(&a).unwrap();
        assert_eq!(sol.values, vec![3.0, 2.0, 1.0]);
        let v = sol.vectors.unwrap();
        assert_eq!(v.col(0), vec![real(0.0), real(1.0), real(0.0)]);
        assert_eq!(v.col(2), vec![real(1.0), real(0.0), real(0.0)]);
    }

    #[test]
    fn two_by_two_analytic() {
        let a = CMatrix::from_real(2, 2, &[2.0, 1.0, 1.0, 2.0]);
        let sol = dense_hermitian_eig(&a).unwrap();
        assert!((sol.values[0] - 3.0).abs() < 1e-14);
        assert!((sol.values[1] - 1.0).abs() < 1e-14);
        let u = sol.vector(0).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        // eigenvectors are defined up to a unit phase
        let phase = u[0] / u[0].norm();
        assert!((u[0] / phase - real(h)).norm() < 1e-14);
        assert!((u[1] / phase - real(h)).norm() < 1e-14);
        let u = sol.vector(1).unwrap();
        let phase = u[0] / u[0].norm();
        assert!((u[1] / phase - real(-h)).norm() < 1e-14);
    }

    #[test]
    fn complex_hermitian_residual_and_orthonormality() {
        let a = CMatrix::from_fn(6, 6, |i, j| {
            let x = ((i * 7 + j * 3) % 11) as f64 - 5.0;
            let y = ((i * 5 + j * 13) % 7) as f64 - 3.0;
            C64::new(x, y)
        });
        let h = a.add(&a.adjoint());
        let sol = dense_hermitian_eig(&h).unwrap();
        assert!(residual(&h, &sol) <= 1e-8 * h.frobenius_norm());
        let v = sol.vectors.unwrap();
        let g = v.adjoint().matmul(&v);
        assert!(g.sub(&CMatrix::identity(6)).frobenius_norm() < 1e-12);
        assert!(sol.values.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn non_hermitian_rejected() {
        let a = CMatrix::from_real(2, 2, &[1.0, 2.0, 0.0, 1.0]);
        assert!(matches!(dense_hermitian_eig(&a), Err(Error::NotHermitian(_))));
    }
}
