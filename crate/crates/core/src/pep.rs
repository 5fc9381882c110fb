//! Performance-estimation SDP for the relaxed proximal point method.
//!
//! The Gram matrix `G = PᵀP` has order `N + 3` and is indexed 0-based:
//!
//! | slot      | column of `P`       |
//! |-----------|---------------------|
//! | `k ≤ N`   | `H^{1/2} w̃_k`       |
//! | `N + 1`   | `H^{1/2} w`         |
//! | `N + 2`   | `H^{-1/2} F(w)`     |
//!
//! (1-based unit vectors `e_1 … e_{N+3}` in the usual derivation map to
//! slots `0 … N+2`.) With `w₀ = 0` each `w_k` is a fixed combination of
//! `w̃_0 … w̃_{k-1}`, see [`coeffs_wk`], so every monotonicity condition on
//! the pairs `(w̃_k, H(w_k - w̃_k))` and `(w, F(w))` is linear in `G`.
//! All stored matrices are the symmetric parts `(A + Aᵀ)/2`.

use std::fmt;
use std::io::Write;

use crate::bounds::{validate_params, ParamError};
use crate::linalg::{cholesky, sym_eig, LinalgError, SymMatrix, Vector};
use crate::operators::{OperatorError, ViProblem};
use crate::rppa::Trajectory;
use crate::scalar::Real;
use crate::sdp::{self, triplet, Constraint, SdpConfig, SdpError, SdpProblem, Sense};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PepError {
    #[error(transparent)]
    Params(#[from] ParamError),
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Solver(#[from] SdpError),
}

/// Slot of `w`.
pub fn point_slot(iterations: usize) -> usize {
    iterations + 1
}

/// Slot of `F(w)`.
pub fn value_slot(iterations: usize) -> usize {
    iterations + 2
}

/// Coordinates of `w_k` (with `w₀ = 0`) in the Gram basis:
/// `w_k = Σ_{i<k} (1-λ)^{k-1-i} λ w̃_i`.
pub fn coeffs_wk<T: Real>(k: usize, relaxation: T, iterations: usize) -> Result<Vector<T>, PepError> {
    if k > iterations {
        return Err(PepError::IndexOutOfRange(format!("k = {k} > N = {iterations}")));
    }
    let mut out = Vector::zeros(iterations + 3);
    let keep = T::one() - relaxation;
    for i in 0..k {
        out[i] = keep.powi((k - 1 - i) as i32) * relaxation;
    }
    Ok(out)
}

/// Coordinates of `w_k - w̃_k`.
fn step_residual<T: Real>(k: usize, relaxation: T, iterations: usize) -> Result<Vector<T>, PepError> {
    let mut v = coeffs_wk(k, relaxation, iterations)?;
    v[k] -= T::one();
    Ok(v)
}

/// `⟨w̃_j - w̃_i, H(w_j - w̃_j) - H(w_i - w̃_i)⟩ = tr(G A_ij)`, `0 ≤ i < j ≤ N`.
pub fn build_a_ij<T: Real>(
    i: usize,
    j: usize,
    relaxation: T,
    iterations: usize,
) -> Result<SymMatrix<T>, PepError> {
    if !(i < j && j <= iterations) {
        return Err(PepError::IndexOutOfRange(format!(
            "need 0 ≤ i < j ≤ N, got i = {i}, j = {j}, N = {iterations}"
        )));
    }
    let u = &step_residual(j, relaxation, iterations)? - &step_residual(i, relaxation, iterations)?;
    let mut v = Vector::zeros(iterations + 3);
    v[j] = T::one();
    v[i] = -T::one();
    Ok(SymMatrix::sym_outer(&u, &v))
}

/// `⟨w̃_i - w, H(w_i - w̃_i) - F(w)⟩ = tr(G A_iw)`, `0 ≤ i ≤ N`.
pub fn build_a_iw<T: Real>(i: usize, relaxation: T, iterations: usize) -> Result<SymMatrix<T>, PepError> {
    let mut u = step_residual(i, relaxation, iterations)?;
    u[value_slot(iterations)] -= T::one();
    let mut v = Vector::zeros(iterations + 3);
    v[i] = T::one();
    v[point_slot(iterations)] = -T::one();
    Ok(SymMatrix::sym_outer(&u, &v))
}

/// `‖w‖²_H = tr(G A_w)`.
pub fn build_a_w<T: Real>(iterations: usize) -> SymMatrix<T> {
    let mut m = SymMatrix::zeros(iterations + 3);
    let s = point_slot(iterations);
    m.set(s, s, T::one());
    m
}

/// Symmetric part of `C`, with `tr(G C) = (w - w̄_N)ᵀ F(w)`.
pub fn build_c<T: Real>(iterations: usize) -> SymMatrix<T> {
    let mut u = Vector::zeros(iterations + 3);
    let weight = T::one() / T::of_usize(iterations + 1);
    for k in 0..=iterations {
        u[k] = -weight;
    }
    u[point_slot(iterations)] = T::one();
    let v = Vector::unit(iterations + 3, value_slot(iterations));
    SymMatrix::sym_outer(&u, &v)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstraintLabel {
    /// Monotonicity between iterates `i < j`.
    Pair { i: usize, j: usize },
    /// Monotonicity between iterate `i` and the reference point `w`.
    Point { i: usize },
    /// `‖w‖_H = 1`.
    Norm,
}

impl fmt::Display for ConstraintLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Pair { i, j } => write!(f, "A_{i}_{j}"),
            Self::Point { i } => write!(f, "A_{i}_w"),
            Self::Norm => f.write_str("A_w"),
        }
    }
}

/// Assembled performance-estimation SDP for fixed `(N, λ)`.
#[derive(Debug, Clone)]
pub struct PepInstance<T = f64> {
    pub iterations: usize,
    pub relaxation: T,
    pub dim: usize,
    pub objective: SymMatrix<T>,
    pub inequalities: Vec<(SymMatrix<T>, ConstraintLabel)>,
    pub normalization: SymMatrix<T>,
    pub normalization_rhs: T,
}

pub fn assemble<T: Real>(iterations: usize, relaxation: T) -> Result<PepInstance<T>, PepError> {
    validate_params(iterations, relaxation)?;
    let n = iterations;
    let mut inequalities = Vec::with_capacity(n * (n + 1) / 2 + n + 1);
    for i in 0..=n {
        for j in (i + 1)..=n {
            inequalities.push((build_a_ij(i, j, relaxation, n)?, ConstraintLabel::Pair { i, j }));
        }
    }
    for i in 0..=n {
        inequalities.push((build_a_iw(i, relaxation, n)?, ConstraintLabel::Point { i }));
    }
    Ok(PepInstance {
        iterations: n,
        relaxation,
        dim: n + 3,
        objective: build_c(n),
        inequalities,
        normalization: build_a_w(n),
        normalization_rhs: T::one(),
    })
}

impl<T: Real> PepInstance<T> {
    pub fn pair_count(&self) -> usize {
        self.inequalities
            .iter()
            .filter(|(_, l)| matches!(l, ConstraintLabel::Pair { .. }))
            .count()
    }

    pub fn point_count(&self) -> usize {
        self.inequalities
            .iter()
            .filter(|(_, l)| matches!(l, ConstraintLabel::Point { .. }))
            .count()
    }

    /// Standard-form SDP `min ⟨C, G⟩` whose negated optimum is the worst-case rate.
    pub fn to_sdp(&self) -> SdpProblem<T> {
        let mut constraints: Vec<Constraint<T>> = self
            .inequalities
            .iter()
            .map(|(m, label)| Constraint::new(m.clone(), Sense::Ge, T::zero()).labeled(label.to_string()))
            .collect();
        constraints.push(
            Constraint::new(self.normalization.clone(), Sense::Eq, self.normalization_rhs)
                .labeled(ConstraintLabel::Norm.to_string()),
        );
        SdpProblem::new(self.objective.clone(), constraints).expect("assembled PEP is well formed")
    }

    pub fn metadata(&self) -> triplet::Meta {
        vec![
            ("N".to_string(), self.iterations.to_string()),
            ("lambda".to_string(), format!("{:e}", self.relaxation.to_f64_lossy())),
        ]
    }

    /// Writes the instance in the triplet exchange format.
    pub fn export<W: Write>(&self, out: W) -> Result<(), PepError> {
        triplet::write_triplets(&self.to_sdp(), &self.metadata(), out)?;
        Ok(())
    }
}

/// Gram matrix of a recorded run and a reference point `w`, after the
/// translation `w₀ → 0` (every column is taken relative to `w₀`).
///
/// Entries: `G[a][b] = x_aᵀ H x_b` for iterate/point slots,
/// `G[a][F] = x_aᵀ F(w)`, `G[F][F] = F(w)ᵀ H⁻¹ F(w)`.
pub fn embed<T: Real>(t: &Trajectory<T>, p: &ViProblem<T>, w: &[T]) -> Result<SymMatrix<T>, PepError> {
    if w.len() != p.dim() {
        return Err(PepError::DimensionMismatch {
            expected: p.dim(),
            found: w.len(),
        });
    }
    if t.start().len() != p.dim() {
        return Err(PepError::DimensionMismatch {
            expected: p.dim(),
            found: t.start().len(),
        });
    }
    let n = t.iterations;
    let start = t.start();
    let mut cols: Vec<Vector<T>> = t.w_tilde.iter().map(|x| x - start).collect();
    cols.push(w.iter().zip(start.iter()).map(|(&a, &b)| a - b).collect());
    let fw = p.evaluate(w)?;
    let h = p.metric();
    let h_cols: Vec<Vector<T>> = cols.iter().map(|x| h.mul_vec(x)).collect();
    let h_inv_f = cholesky(h)?.solve(&fw);

    let f = value_slot(n);
    Ok(SymMatrix::from_fn(n + 3, |a, b| {
        if a == f && b == f {
            fw.dot(&h_inv_f)
        } else if a == f {
            cols[b].dot(&fw)
        } else {
            cols[a].dot(&h_cols[b])
        }
    }))
}

#[derive(Debug, Clone)]
pub struct SolverStats<T = f64> {
    pub iterations: usize,
    pub primal_residual: T,
    pub dual_residual: T,
    pub min_eigenvalue: T,
    pub max_violation: T,
}

#[derive(Debug, Clone)]
pub struct PepSolution<T = f64> {
    pub g: SymMatrix<T>,
    /// `-tr(G C_sym)`: the worst-case ergodic rate factor.
    pub eps: T,
    pub stats: SolverStats<T>,
}

/// Solves the instance with the embedded ADMM solver.
pub fn solve_pep<T: Real>(inst: &PepInstance<T>, cfg: &SdpConfig<T>) -> Result<PepSolution<T>, PepError> {
    let problem = inst.to_sdp();
    let result = sdp::solve(&problem, cfg)?;
    let min_eigenvalue = sym_eig(&result.g)?.min_value();
    let max_violation = problem.max_violation(&result.g);
    Ok(PepSolution {
        eps: -result.objective_value,
        stats: SolverStats {
            iterations: result.iterations,
            primal_residual: result.primal_residual,
            dual_residual: result.dual_residual,
            min_eigenvalue,
            max_violation,
        },
        g: result.g,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coefficient_expansion() {
        let lam = 1.5;
        assert_eq!(coeffs_wk(0, lam, 3).unwrap(), Vector::zeros(6));
        let c1 = coeffs_wk(1, lam, 3).unwrap();
        assert_eq!(c1.as_slice(), &[1.5, 0.0, 0.0, 0.0, 0.0, 0.0]);
        let c2 = coeffs_wk(2, lam, 3).unwrap();
        assert_eq!(c2.as_slice(), &[(1.0 - lam) * lam, lam, 0.0, 0.0, 0.0, 0.0]);
        assert!(coeffs_wk(4, lam, 3).is_err());
    }

    #[test]
    fn norm_matrix_single_entry() {
        let a = build_a_w::<f64>(4);
        assert_eq!(a.nnz_lower(), 1);
        assert_eq!(a.get(5, 5), 1.0);
    }

    #[test]
    fn index_violations() {
        assert!(build_a_ij(2, 2, 1.0, 3).is_err());
        assert!(build_a_ij(3, 2, 1.0, 3).is_err());
        assert!(build_a_ij(0, 4, 1.0, 3).is_err());
        assert!(build_a_iw(4, 1.0, 3).is_err());
    }

    #[test]
    fn constraint_counts() {
        for (n, pairs, points) in [(1, 1, 2), (3, 6, 4), (50, 1275, 51)] {
            let inst = assemble(n, 1.5).unwrap();
            assert_eq!(inst.dim, n + 3);
            assert_eq!(inst.pair_count(), pairs);
            assert_eq!(inst.point_count(), points);
            assert_eq!(inst.to_sdp().constraints().len(), pairs + points + 1);
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(matches!(assemble(0, 1.0), Err(PepError::Params(_))));
        assert!(matches!(assemble(3, 2.0), Err(PepError::Params(_))));
        assert!(matches!(assemble(3, 0.0), Err(PepError::Params(_))));
    }

    #[test]
    fn objective_is_symmetric_part() {
        // C = (e_w - avg) e_Fᵀ; its symmetric part has half weights off-diagonal.
        let c = build_c::<f64>(1);
        assert_eq!(c.get(2, 3), 0.5);
        assert_eq!(c.get(0, 3), -0.25);
        assert_eq!(c.get(1, 3), -0.25);
        assert_eq!(c.get(3, 3), 0.0);
    }

    #[test]
    fn export_round_trips() {
        let inst = assemble(2, 1.5).unwrap();
        let mut buf = Vec::new();
        inst.export(&mut buf).unwrap();
        let (p, meta) = triplet::read_triplets::<f64, _>(buf.as_slice()).unwrap();
        assert_eq!(p, inst.to_sdp());
        assert_eq!(meta[0], ("N".to_string(), "2".to_string()));
    }
}
