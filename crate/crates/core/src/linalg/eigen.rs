//! Cyclic Jacobi eigensolver for dense symmetric matrices.
//!
//! Each sweep visits every off-diagonal pair `(p, q)` once and applies the
//! plane rotation that annihilates `a[p][q]`. Iteration stops when the
//! off-diagonal Frobenius mass falls below `OFF_DIAGONAL_REL_TOL * ‖M‖_F`.

use crate::linalg::{LinalgError, Matrix, SymMatrix, Vector};
use crate::scalar::Real;

pub const MAX_SWEEPS: usize = 100;
pub const OFF_DIAGONAL_REL_TOL: f64 = 1e-12;

/// Eigenpairs of a symmetric matrix: `M Q = Q diag(values)`, values ascending,
/// eigenvectors stored as the columns of `vectors`.
#[derive(Debug, Clone)]
pub struct SymEigen<T = f64> {
    pub values: Vector<T>,
    pub vectors: Matrix<T>,
}

impl<T: Real> SymEigen<T> {
    pub fn min_value(&self) -> T {
        self.values[0]
    }

    pub fn max_value(&self) -> T {
        self.values[self.values.len() - 1]
    }

    /// `Σ f(λ_i) q_i q_iᵀ`, skipping eigenvalues mapped to zero.
    pub fn recompose_with(&self, mut f: impl FnMut(T) -> T) -> SymMatrix<T> {
        let n = self.values.len();
        let mut packed = vec![T::zero(); n * (n + 1) / 2];
        for k in 0..n {
            let w = f(self.values[k]);
            if w == T::zero() {
                continue;
            }
            let q = self.vectors.column(k);
            let mut idx = 0;
            for i in 0..n {
                let wi = w * q[i];
                for j in 0..=i {
                    packed[idx] += wi * q[j];
                    idx += 1;
                }
            }
        }
        SymMatrix::from_packed(n, packed)
    }

    pub fn recompose(&self) -> SymMatrix<T> {
        self.recompose_with(|v| v)
    }
}

fn tolerance<T: Real>() -> T {
    T::lit(OFF_DIAGONAL_REL_TOL).max(T::epsilon() * T::lit(8.0))
}

/// Eigendecomposition by cyclic Jacobi rotations.
pub fn sym_eig<T: Real>(m: &SymMatrix<T>) -> Result<SymEigen<T>, LinalgError> {
    let n = m.order();
    let a = m.to_dense();
    jacobi(n, a, Matrix::identity(n), m.frobenius_norm())
}

/// Eigendecomposition started from an approximate eigenbasis `basis`
/// (orthogonal columns). Rotates `M` into that basis first, so a good guess
/// converges in one or two sweeps.
pub fn sym_eig_warm<T: Real>(
    m: &SymMatrix<T>,
    basis: &Matrix<T>,
) -> Result<SymEigen<T>, LinalgError> {
    let n = m.order();
    if basis.rows() != n || basis.cols() != n {
        return Err(LinalgError::DimensionMismatch {
            expected: n,
            found: basis.rows(),
        });
    }
    let rotated = basis.transpose().matmul(&m.to_dense()).matmul(basis);
    let a = rotated.symmetric_part().to_dense();
    jacobi(n, a, basis.clone(), m.frobenius_norm())
}

fn jacobi<T: Real>(
    n: usize,
    mut a: Matrix<T>,
    mut v: Matrix<T>,
    scale: T,
) -> Result<SymEigen<T>, LinalgError> {
    let threshold = tolerance::<T>() * scale;
    let mut converged = false;
    let mut off = T::zero();
    for _ in 0..=MAX_SWEEPS {
        off = off_diagonal_norm(&a, n);
        if off <= threshold {
            converged = true;
            break;
        }
        // Entries below `skip` cannot keep the off-diagonal norm above the threshold.
        let skip = threshold / T::of_usize(n);
        for p in 0..n.saturating_sub(1) {
            for q in (p + 1)..n {
                if a[(p, q)].abs() > skip {
                    rotate(&mut a, &mut v, n, p, q);
                }
            }
        }
    }
    if !converged {
        return Err(LinalgError::NoConvergence {
            sweeps: MAX_SWEEPS,
            off_diagonal: off.to_f64_lossy(),
        });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].partial_cmp(&a[(j, j)]).expect("finite eigenvalues"));
    let values = order.iter().map(|&i| a[(i, i)]).collect();
    let vectors = Matrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    Ok(SymEigen { values, vectors })
}

fn off_diagonal_norm<T: Real>(a: &Matrix<T>, n: usize) -> T {
    let mut s = T::zero();
    for i in 0..n {
        for j in 0..i {
            s += a[(i, j)] * a[(i, j)];
        }
    }
    (s + s).sqrt()
}

#[inline]
fn rotate<T: Real>(a: &mut Matrix<T>, v: &mut Matrix<T>, n: usize, p: usize, q: usize) {
    let apq = a[(p, q)];
    if apq == T::zero() {
        return;
    }
    let app = a[(p, p)];
    let aqq = a[(q, q)];
    let theta = (aqq - app) / (apq + apq);
    let t = {
        let mag = T::one() / (theta.abs() + T::one().hypot(theta));
        if theta < T::zero() {
            -mag
        } else {
            mag
        }
    };
    let c = T::one() / T::one().hypot(t);
    let s = t * c;

    a[(p, p)] = app - t * apq;
    a[(q, q)] = aqq + t * apq;
    a[(p, q)] = T::zero();
    a[(q, p)] = T::zero();
    for k in 0..n {
        if k == p || k == q {
            continue;
        }
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        let new_kp = c * akp - s * akq;
        let new_kq = s * akp + c * akq;
        a[(k, p)] = new_kp;
        a[(p, k)] = new_kp;
        a[(k, q)] = new_kq;
        a[(q, k)] = new_kq;
    }
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = c * vkp - s * vkq;
        v[(k, q)] = s * vkp + c * vkq;
    }
}

/// Frobenius-nearest positive semidefinite matrix: negative eigenvalues clamped to zero.
pub fn psd_project<T: Real>(m: &SymMatrix<T>) -> Result<SymMatrix<T>, LinalgError> {
    Ok(sym_eig(m)?.recompose_with(|v| v.max(T::zero())))
}
