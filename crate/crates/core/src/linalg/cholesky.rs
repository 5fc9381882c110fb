use crate::linalg::{LinalgError, Matrix, SymMatrix, Vector};
use crate::scalar::Real;

/// Relative pivot floor: a pivot must exceed this times the largest diagonal entry.
pub const PIVOT_RELATIVE_TOL: f64 = 1e-12;

/// Lower-triangular factor `L` with `L Lᵀ = M`.
#[derive(Debug, Clone)]
pub struct Cholesky<T = f64> {
    l: Matrix<T>,
}

/// Factors a symmetric positive definite matrix.
pub fn cholesky<T: Real>(m: &SymMatrix<T>) -> Result<Cholesky<T>, LinalgError> {
    let n = m.order();
    let max_diag = m.max_diag();
    let floor = T::lit(PIVOT_RELATIVE_TOL) * max_diag.max(T::zero());
    let mut l = Matrix::zeros(n, n);
    for j in 0..n {
        let mut d = m.get(j, j);
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if !(d > floor) || max_diag <= T::zero() {
            return Err(LinalgError::NotPositiveDefinite {
                index: j,
                pivot: d.to_f64_lossy(),
            });
        }
        let djj = d.sqrt();
        l[(j, j)] = djj;
        for i in (j + 1)..n {
            let mut s = m.get(i, j);
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / djj;
        }
    }
    Ok(Cholesky { l })
}

impl<T: Real> Cholesky<T> {
    pub fn factor(&self) -> &Matrix<T> {
        &self.l
    }

    pub fn order(&self) -> usize {
        self.l.rows()
    }

    /// Solves `M x = b` in place.
    pub fn solve_in_place(&self, b: &mut [T]) {
        let n = self.order();
        debug_assert_eq!(b.len(), n);
        for i in 0..n {
            let row = self.l.row(i);
            let mut s = b[i];
            for k in 0..i {
                s -= row[k] * b[k];
            }
            b[i] = s / row[i];
        }
        for i in (0..n).rev() {
            let mut s = b[i];
            for k in (i + 1)..n {
                s -= self.l[(k, i)] * b[k];
            }
            b[i] = s / self.l[(i, i)];
        }
    }

    pub fn solve(&self, b: &[T]) -> Vector<T> {
        let mut x = Vector::from_slice(b);
        self.solve_in_place(&mut x);
        x
    }

    /// `L Lᵀ`
    pub fn reconstruct(&self) -> SymMatrix<T> {
        let n = self.order();
        SymMatrix::from_fn(n, |i, j| {
            (0..=j).map(|k| self.l[(i, k)] * self.l[(j, k)]).sum()
        })
    }
}
