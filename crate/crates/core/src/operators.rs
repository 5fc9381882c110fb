//! Monotone operators, constraint sets, and the closed-form resolvents that
//! realize one proximal step
//! `(w - w̃)ᵀ [F(w̃) + H(w̃ - w_k)] ≥ 0  for all w ∈ Ω`.

use std::fmt;

use crate::linalg::{cholesky, sym_eig, LinalgError, Matrix, SymMatrix, Vector};
use crate::scalar::Real;

/// Smallest admissible eigenvalue of `M + Mᵀ` for an affine operator.
pub const MONOTONE_EIG_TOL: f64 = 1e-10;

/// Relative tolerance on the proximal-step optimality check.
pub const STEP_CHECK_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OperatorError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("affine operator is not monotone: min eigenvalue of M + Mᵀ is {min_eigenvalue:e}")]
    NotMonotone { min_eigenvalue: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("relaxation parameter {0} outside (0, 2)")]
    InvalidRelaxation(f64),
    #[error("metric is not symmetric positive definite")]
    MetricNotPositiveDefinite,
    #[error("no closed-form resolvent for {operator} on {set}")]
    UnsupportedPairing { operator: String, set: String },
    #[error("resolvent system H + M is numerically singular")]
    SingularResolvent,
    #[error("proximal step failed its optimality check (violation {violation:e})")]
    StepCheckFailed { violation: f64 },
}

/// Monotone, continuous operator catalog.
#[derive(Debug, Clone, PartialEq)]
pub enum Operator<T = f64> {
    /// `F(w) = M w + q` with `M + Mᵀ ⪰ 0`.
    Affine { matrix: Matrix<T>, offset: Vector<T> },
    /// One-dimensional saturated ramp centred at `center`:
    /// `c` above `center + δ`, `-c` below `center - δ`, slope `c/δ` in between.
    Piecewise1D { c: T, delta: T, center: T },
    Zero { dim: usize },
}

impl<T: Real> Operator<T> {
    pub fn affine(matrix: Matrix<T>, offset: Vector<T>) -> Result<Self, OperatorError> {
        if !matrix.is_square() {
            return Err(OperatorError::DimensionMismatch {
                expected: matrix.rows(),
                found: matrix.cols(),
            });
        }
        if offset.len() != matrix.rows() {
            return Err(OperatorError::DimensionMismatch {
                expected: matrix.rows(),
                found: offset.len(),
            });
        }
        if !offset.is_finite() || !matrix.as_slice().iter().all(|x| x.is_finite()) {
            return Err(OperatorError::InvalidParameter(
                "affine operator data must be finite".into(),
            ));
        }
        let doubled_sym = matrix.symmetric_part().scaled(T::lit(2.0));
        let min_eig = sym_eig(&doubled_sym)?.min_value();
        if min_eig < -T::lit(MONOTONE_EIG_TOL) {
            return Err(OperatorError::NotMonotone {
                min_eigenvalue: min_eig.to_f64_lossy(),
            });
        }
        Ok(Self::Affine { matrix, offset })
    }

    pub fn piecewise(c: T, delta: T) -> Result<Self, OperatorError> {
        Self::piecewise_centered(c, delta, T::zero())
    }

    pub fn piecewise_centered(c: T, delta: T, center: T) -> Result<Self, OperatorError> {
        if !(c > T::zero() && c.is_finite()) {
            return Err(OperatorError::InvalidParameter(format!("c = {c} must be positive")));
        }
        if !(delta > T::zero() && delta.is_finite()) {
            return Err(OperatorError::InvalidParameter(format!(
                "delta = {delta} must be positive"
            )));
        }
        if !center.is_finite() {
            return Err(OperatorError::InvalidParameter("center must be finite".into()));
        }
        Ok(Self::Piecewise1D { c, delta, center })
    }

    pub fn zero(dim: usize) -> Self {
        Self::Zero { dim }
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Affine { matrix, .. } => matrix.rows(),
            Self::Piecewise1D { .. } => 1,
            Self::Zero { dim } => *dim,
        }
    }

    pub fn evaluate(&self, w: &[T]) -> Result<Vector<T>, OperatorError> {
        check_dim(self.dim(), w.len())?;
        Ok(match self {
            Self::Affine { matrix, offset } => &matrix.mul_vec(w) + offset,
            Self::Piecewise1D { c, delta, center } => {
                Vector::from_vec(vec![ramp(*c, *delta, w[0] - *center)])
            }
            Self::Zero { dim } => Vector::zeros(*dim),
        })
    }

    /// `G(u) = F(R u) / R`.
    pub fn scaled(&self, factor: T) -> Self {
        match self {
            Self::Affine { matrix, offset } => Self::Affine {
                matrix: matrix.clone(),
                offset: offset.scaled(T::one() / factor),
            },
            Self::Piecewise1D { c, delta, center } => Self::Piecewise1D {
                c: *c / factor,
                delta: *delta / factor,
                center: *center / factor,
            },
            Self::Zero { dim } => Self::Zero { dim: *dim },
        }
    }

    /// `G(u) = F(u + shift)`.
    pub fn translated(&self, shift: &[T]) -> Self {
        match self {
            Self::Affine { matrix, offset } => Self::Affine {
                matrix: matrix.clone(),
                offset: &matrix.mul_vec(shift) + offset,
            },
            Self::Piecewise1D { c, delta, center } => Self::Piecewise1D {
                c: *c,
                delta: *delta,
                center: *center - shift[0],
            },
            Self::Zero { dim } => Self::Zero { dim: *dim },
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            Self::Affine { .. } => "affine operator",
            Self::Piecewise1D { .. } => "piecewise 1-D operator",
            Self::Zero { .. } => "zero operator",
        }
    }
}

/// The three-branch ramp: `c` on `(δ, ∞)`, `(c/δ) y` on `[-δ, δ]`, `-c` on `(-∞, -δ)`.
fn ramp<T: Real>(c: T, delta: T, y: T) -> T {
    if y > delta {
        c
    } else if y < -delta {
        -c
    } else {
        c / delta * y
    }
}

/// Root of `ramp(y) + h (y - y_k) = 0`, the unique solution by monotonicity.
/// The middle segment is tried first so boundary ties land there.
fn ramp_resolvent<T: Real>(c: T, delta: T, h: T, yk: T) -> T {
    let middle = h * yk / (c / delta + h);
    if middle.abs() <= delta {
        return middle;
    }
    let upper = yk - c / h;
    if upper > delta {
        return upper;
    }
    let lower = yk + c / h;
    if lower < -delta {
        return lower;
    }
    // Rounding at a breakpoint: keep the candidate with the smallest equation residual.
    [middle.max(-delta).min(delta), upper, lower]
        .into_iter()
        .map(|y| (y, (ramp(c, delta, y) + h * (y - yk)).abs()))
        .min_by(|a, b| a.1.partial_cmp(&b.1).expect("finite residuals"))
        .map(|(y, _)| y)
        .expect("three candidates")
}

impl<T: Real> fmt::Display for Operator<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Affine { matrix, .. } => write!(f, "affine(dim {})", matrix.rows()),
            Self::Piecewise1D { c, delta, center } => {
                write!(f, "piecewise(c={c}, delta={delta}, center={center})")
            }
            Self::Zero { dim } => write!(f, "zero(dim {dim})"),
        }
    }
}

/// Closed convex feasible set Ω.
#[derive(Debug, Clone, PartialEq)]
pub enum ConstraintSet<T = f64> {
    WholeSpace { dim: usize },
    /// Componentwise bounds; entries may be infinite.
    Box { lower: Vector<T>, upper: Vector<T> },
}

impl<T: Real> ConstraintSet<T> {
    pub fn whole_space(dim: usize) -> Self {
        Self::WholeSpace { dim }
    }

    pub fn boxed(lower: Vector<T>, upper: Vector<T>) -> Result<Self, OperatorError> {
        check_dim(lower.len(), upper.len())?;
        for (l, u) in lower.iter().zip(upper.iter()) {
            if l.is_nan() || u.is_nan() || l > u || *l == T::infinity() || *u == T::neg_infinity()
            {
                return Err(OperatorError::InvalidParameter(format!(
                    "box bounds [{l}, {u}] are empty or invalid"
                )));
            }
        }
        Ok(Self::Box { lower, upper })
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::WholeSpace { dim } => *dim,
            Self::Box { lower, .. } => lower.len(),
        }
    }

    pub fn contains(&self, w: &[T]) -> bool {
        match self {
            Self::WholeSpace { dim } => w.len() == *dim,
            Self::Box { lower, upper } => {
                w.len() == lower.len()
                    && w.iter()
                        .zip(lower.iter().zip(upper.iter()))
                        .all(|(x, (l, u))| l <= x && x <= u)
            }
        }
    }

    /// Euclidean projection.
    pub fn project(&self, w: &[T]) -> Vector<T> {
        match self {
            Self::WholeSpace { .. } => Vector::from_slice(w),
            Self::Box { lower, upper } => w
                .iter()
                .zip(lower.iter().zip(upper.iter()))
                .map(|(&x, (&l, &u))| x.max(l).min(u))
                .collect(),
        }
    }

    /// `Ω / R`
    pub fn scaled(&self, factor: T) -> Self {
        match self {
            Self::WholeSpace { dim } => Self::WholeSpace { dim: *dim },
            Self::Box { lower, upper } => Self::Box {
                lower: lower.scaled(T::one() / factor),
                upper: upper.scaled(T::one() / factor),
            },
        }
    }

    /// `Ω - shift`
    pub fn translated(&self, shift: &[T]) -> Self {
        match self {
            Self::WholeSpace { dim } => Self::WholeSpace { dim: *dim },
            Self::Box { lower, upper } => Self::Box {
                lower: lower.iter().zip(shift).map(|(&l, &s)| l - s).collect(),
                upper: upper.iter().zip(shift).map(|(&u, &s)| u - s).collect(),
            },
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            Self::WholeSpace { .. } => "whole space",
            Self::Box { .. } => "box",
        }
    }
}

/// A monotone VI instance together with the algorithm parameters:
/// metric `H`, relaxation `λ ∈ (0, 2)`, and starting point `w₀`.
#[derive(Debug, Clone)]
pub struct ViProblem<T = f64> {
    operator: Operator<T>,
    set: ConstraintSet<T>,
    metric: SymMatrix<T>,
    relaxation: T,
    start: Vector<T>,
}

impl<T: Real> ViProblem<T> {
    pub fn new(
        operator: Operator<T>,
        set: ConstraintSet<T>,
        metric: SymMatrix<T>,
        relaxation: T,
        start: Vector<T>,
    ) -> Result<Self, OperatorError> {
        if !(relaxation > T::zero() && relaxation < T::lit(2.0)) {
            return Err(OperatorError::InvalidRelaxation(relaxation.to_f64_lossy()));
        }
        let dim = operator.dim();
        check_dim(dim, set.dim())?;
        check_dim(dim, metric.order())?;
        check_dim(dim, start.len())?;
        if !start.is_finite() {
            return Err(OperatorError::InvalidParameter("start point must be finite".into()));
        }
        cholesky(&metric).map_err(|_| OperatorError::MetricNotPositiveDefinite)?;
        Ok(Self {
            operator,
            set,
            metric,
            relaxation,
            start,
        })
    }

    /// Unit metric, whole space.
    pub fn unconstrained(
        operator: Operator<T>,
        relaxation: T,
        start: Vector<T>,
    ) -> Result<Self, OperatorError> {
        let dim = operator.dim();
        Self::new(
            operator,
            ConstraintSet::whole_space(dim),
            SymMatrix::identity(dim),
            relaxation,
            start,
        )
    }

    pub fn operator(&self) -> &Operator<T> {
        &self.operator
    }

    pub fn set(&self) -> &ConstraintSet<T> {
        &self.set
    }

    pub fn metric(&self) -> &SymMatrix<T> {
        &self.metric
    }

    pub fn relaxation(&self) -> T {
        self.relaxation
    }

    pub fn start(&self) -> &Vector<T> {
        &self.start
    }

    pub fn dim(&self) -> usize {
        self.start.len()
    }

    pub fn with_start(&self, start: Vector<T>) -> Result<Self, OperatorError> {
        Self::new(
            self.operator.clone(),
            self.set.clone(),
            self.metric.clone(),
            self.relaxation,
            start,
        )
    }

    pub fn with_relaxation(&self, relaxation: T) -> Result<Self, OperatorError> {
        Self::new(
            self.operator.clone(),
            self.set.clone(),
            self.metric.clone(),
            relaxation,
            self.start.clone(),
        )
    }

    pub fn evaluate(&self, w: &[T]) -> Result<Vector<T>, OperatorError> {
        self.operator.evaluate(w)
    }

    /// `‖x‖²_H`
    pub fn h_norm_sq(&self, x: &[T]) -> T {
        self.metric.bilinear(x, x)
    }

    /// The proximal step: returns `w̃` solving the regularized VI at `w_k`.
    pub fn ppa_step(&self, wk: &[T]) -> Result<Vector<T>, OperatorError> {
        check_dim(self.dim(), wk.len())?;
        let unsupported = || OperatorError::UnsupportedPairing {
            operator: self.operator.kind().to_string(),
            set: self.set.kind().to_string(),
        };
        match (&self.operator, &self.set) {
            (Operator::Affine { matrix, offset }, ConstraintSet::WholeSpace { .. }) => {
                let n = matrix.rows();
                let system = Matrix::from_fn(n, n, |i, j| matrix[(i, j)] + self.metric.get(i, j));
                let rhs = &self.metric.mul_vec(wk) - offset;
                system.solve(&rhs).map_err(|e| match e {
                    LinalgError::Singular { .. } => OperatorError::SingularResolvent,
                    other => other.into(),
                })
            }
            (Operator::Zero { .. }, ConstraintSet::WholeSpace { .. }) => Ok(Vector::from_slice(wk)),
            (_, ConstraintSet::WholeSpace { .. }) => {
                Ok(Vector::from_vec(vec![self.scalar_resolvent(wk[0])]))
            }
            (_, ConstraintSet::Box { lower, upper }) if self.dim() == 1 => {
                // g(x) = F(x) + h(x - w_k) is increasing in 1-D, so clamping its root is exact.
                let x = self.scalar_resolvent(wk[0]).max(lower[0]).min(upper[0]);
                Ok(Vector::from_vec(vec![x]))
            }
            _ => Err(unsupported()),
        }
    }

    /// Unconstrained 1-D resolvent `(I + F/h)^{-1}`.
    fn scalar_resolvent(&self, wk: T) -> T {
        let h = self.metric.get(0, 0);
        match &self.operator {
            Operator::Affine { matrix, offset } => (h * wk - offset[0]) / (h + matrix[(0, 0)]),
            Operator::Piecewise1D { c, delta, center } => {
                *center + ramp_resolvent(*c, *delta, h, wk - *center)
            }
            Operator::Zero { .. } => wk,
        }
    }

    /// `F(w̃) + H(w̃ - w_k)`
    pub fn step_map(&self, w_tilde: &[T], wk: &[T]) -> Result<Vector<T>, OperatorError> {
        check_dim(self.dim(), w_tilde.len())?;
        check_dim(self.dim(), wk.len())?;
        let diff: Vector<T> = w_tilde.iter().zip(wk).map(|(&a, &b)| a - b).collect();
        Ok(&self.operator.evaluate(w_tilde)? + &self.metric.mul_vec(&diff))
    }

    /// Minimum over `probes` of `(w - w̃)ᵀ[F(w̃) + H(w̃ - w_k)]`; nonnegative for an exact step.
    pub fn residual(&self, w_tilde: &[T], wk: &[T], probes: &[Vector<T>]) -> Result<T, OperatorError> {
        let g = self.step_map(w_tilde, wk)?;
        let mut worst = T::infinity();
        for w in probes {
            check_dim(self.dim(), w.len())?;
            let value: T = w
                .iter()
                .zip(w_tilde)
                .zip(g.iter())
                .map(|((&wi, &ti), &gi)| (wi - ti) * gi)
                .sum();
            worst = worst.min(value);
        }
        Ok(worst)
    }

    /// Exact optimality violation of a proximal step. On the whole space this
    /// is `‖F(w̃) + H(w̃ - w_k)‖_∞`; on a box it is the componentwise
    /// complementarity violation.
    pub fn step_violation(&self, w_tilde: &[T], wk: &[T]) -> Result<T, OperatorError> {
        let g = self.step_map(w_tilde, wk)?;
        Ok(match &self.set {
            ConstraintSet::WholeSpace { .. } => g.norm_inf(),
            ConstraintSet::Box { lower, upper } => {
                let mut worst = T::zero();
                for i in 0..g.len() {
                    let (x, l, u, gi) = (w_tilde[i], lower[i], upper[i], g[i]);
                    let v = if x < l || x > u {
                        T::infinity()
                    } else if l == u {
                        T::zero()
                    } else if x == l {
                        (-gi).max(T::zero())
                    } else if x == u {
                        gi.max(T::zero())
                    } else {
                        gi.abs()
                    };
                    worst = worst.max(v);
                }
                worst
            }
        })
    }

    /// Proximal step plus its optimality check.
    pub fn checked_step(&self, wk: &[T]) -> Result<Vector<T>, OperatorError> {
        let w_tilde = self.ppa_step(wk)?;
        let violation = self.step_violation(&w_tilde, wk)?;
        let scale = T::one()
            + self.operator.evaluate(&w_tilde)?.norm_inf()
            + self.metric.mul_vec(&w_tilde).norm_inf()
            + self.metric.mul_vec(wk).norm_inf();
        if !(violation <= T::lit(STEP_CHECK_TOL) * scale) {
            return Err(OperatorError::StepCheckFailed {
                violation: violation.to_f64_lossy(),
            });
        }
        Ok(w_tilde)
    }
}

fn check_dim(expected: usize, found: usize) -> Result<(), OperatorError> {
    if expected == found {
        Ok(())
    } else {
        Err(OperatorError::DimensionMismatch { expected, found })
    }
}
