//! Self-contained dense linear algebra: vectors, symmetric matrices,
//! Cholesky, Jacobi eigendecomposition and PSD-cone projection.

mod cholesky;
mod eigen;
mod matrix;
mod sym;
mod vector;

pub use cholesky::{cholesky, Cholesky, PIVOT_RELATIVE_TOL};
pub use eigen::{psd_project, sym_eig, sym_eig_warm, SymEigen, MAX_SWEEPS, OFF_DIAGONAL_REL_TOL};
pub use matrix::Matrix;
pub use sym::SymMatrix;
pub use vector::Vector;

use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LinalgError {
    #[error("matrix is not positive definite (pivot {pivot:e} at index {index})")]
    NotPositiveDefinite { index: usize, pivot: f64 },
    #[error("Jacobi iteration did not converge in {sweeps} sweeps (off-diagonal norm {off_diagonal:e})")]
    NoConvergence { sweeps: usize, off_diagonal: f64 },
    #[error("linear system is singular (column {column})")]
    Singular { column: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
}

fn check_dim(expected: usize, found: usize) -> Result<(), LinalgError> {
    if expected == found {
        Ok(())
    } else {
        Err(LinalgError::DimensionMismatch { expected, found })
    }
}

/// `xᵀ H y`
pub fn h_inner<T: Real>(h: &SymMatrix<T>, x: &[T], y: &[T]) -> Result<T, LinalgError> {
    check_dim(h.order(), x.len())?;
    check_dim(h.order(), y.len())?;
    Ok(h.bilinear(x, y))
}

/// `‖x‖²_H = xᵀ H x`
pub fn h_norm_sq<T: Real>(h: &SymMatrix<T>, x: &[T]) -> Result<T, LinalgError> {
    h_inner(h, x, x)
}
