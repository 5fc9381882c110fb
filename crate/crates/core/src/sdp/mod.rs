//! Small dense standard-form SDP solver:
//!
//! ```text
//! minimize   ⟨C, G⟩
//! subject to ⟨A_i, G⟩ ≥ b_i  or  ⟨A_i, G⟩ = b_i,   G ⪰ 0
//! ```
//!
//! Solved by over-relaxed ADMM on the splitting "affine set ∩ cone", see
//! [`admm`]. A plain-text triplet exchange format lives in [`triplet`].

pub mod admm;
pub mod triplet;

use std::fmt;

use crate::linalg::{LinalgError, SymMatrix};
use crate::scalar::Real;

pub use admm::{run_admm, solve};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    /// `⟨A, G⟩ ≥ b`
    Ge,
    /// `⟨A, G⟩ = b`
    Eq,
}

impl fmt::Display for Sense {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sense::Ge => "ge",
            Sense::Eq => "eq",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint<T = f64> {
    pub matrix: SymMatrix<T>,
    pub sense: Sense,
    pub rhs: T,
    pub label: String,
}

impl<T: Real> Constraint<T> {
    pub fn new(matrix: SymMatrix<T>, sense: Sense, rhs: T) -> Self {
        Self {
            matrix,
            sense,
            rhs,
            label: String::new(),
        }
    }

    pub fn labeled(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Signed violation at `g`: positive means infeasible.
    pub fn violation(&self, g: &SymMatrix<T>) -> T {
        let lhs = self.matrix.dot(g);
        match self.sense {
            Sense::Ge => self.rhs - lhs,
            Sense::Eq => (lhs - self.rhs).abs(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SdpProblem<T = f64> {
    dim: usize,
    objective: SymMatrix<T>,
    constraints: Vec<Constraint<T>>,
}

impl<T: Real> SdpProblem<T> {
    pub fn new(objective: SymMatrix<T>, constraints: Vec<Constraint<T>>) -> Result<Self, SdpError> {
        let dim = objective.order();
        if constraints.is_empty() {
            return Err(SdpError::InvalidProblem("at least one constraint is required".into()));
        }
        for (k, c) in constraints.iter().enumerate() {
            if c.matrix.order() != dim {
                return Err(SdpError::InvalidProblem(format!(
                    "constraint {k} has order {}, objective has order {dim}",
                    c.matrix.order()
                )));
            }
            if !c.matrix.is_finite() || !c.rhs.is_finite() {
                return Err(SdpError::InvalidProblem(format!("constraint {k} is not finite")));
            }
        }
        if !objective.is_finite() {
            return Err(SdpError::InvalidProblem("objective is not finite".into()));
        }
        Ok(Self {
            dim,
            objective,
            constraints,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn objective(&self) -> &SymMatrix<T> {
        &self.objective
    }

    pub fn constraints(&self) -> &[Constraint<T>] {
        &self.constraints
    }

    /// Largest constraint violation at `g`.
    pub fn max_violation(&self, g: &SymMatrix<T>) -> T {
        self.constraints
            .iter()
            .map(|c| c.violation(g))
            .fold(T::neg_infinity(), T::max)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SdpConfig<T = f64> {
    /// Initial ADMM penalty.
    pub rho: T,
    pub max_iter: usize,
    /// Stopping tolerance on the scaled primal and dual residuals.
    pub tol: T,
    /// Over-relaxation factor in `(0, 2)`.
    pub over_relax: T,
    /// Residual-balancing penalty updates.
    pub adaptive_rho: bool,
    /// Number of trailing cone iterates averaged into the reported solution;
    /// the last iterate is reported instead when it is more feasible.
    pub average_window: usize,
    /// Anderson acceleration memory; 0 disables it.
    pub anderson_memory: usize,
}

impl<T: Real> Default for SdpConfig<T> {
    fn default() -> Self {
        Self {
            rho: T::one(),
            max_iter: 200_000,
            tol: T::lit(1e-8),
            over_relax: T::lit(1.6),
            adaptive_rho: true,
            average_window: 50,
            anderson_memory: 30,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SdpStatus {
    Optimal,
    IterationCap,
}

#[derive(Debug, Clone)]
pub struct SdpResult<T = f64> {
    pub g: SymMatrix<T>,
    pub objective_value: T,
    /// Scaled primal residual at termination.
    pub primal_residual: T,
    /// Scaled dual residual at termination.
    pub dual_residual: T,
    pub iterations: usize,
    pub status: SdpStatus,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SdpError {
    #[error(
        "SDP solver hit the iteration cap ({iterations}): primal residual {primal_residual:e}, \
         dual residual {dual_residual:e}, objective {objective:e}"
    )]
    SolverFailed {
        iterations: usize,
        primal_residual: f64,
        dual_residual: f64,
        objective: f64,
    },
    #[error("constraint normal matrix is not factorizable: {0}")]
    DegenerateConstraints(String),
    #[error("invalid SDP: {0}")]
    InvalidProblem(String),
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("triplet format, line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for SdpError {
    fn from(e: std::io::Error) -> Self {
        SdpError::Io(e.to_string())
    }
}
