//! Over-relaxed ADMM for the SDP in [`super`].
//!
//! Work happens in `svec` coordinates (packed lower triangle, off-diagonal
//! entries scaled by `√2`) so that `⟨A, G⟩` is a Euclidean dot product.
//! Inequalities receive nonnegative slacks `s_i` with `⟨A_i, G⟩ - s_i = b_i`.
//! With `x = (svec G, s)` the splitting is
//!
//! ```text
//! x ← Π_affine(z - u - c/ρ)
//! x̂ ← α x + (1 - α) z
//! z ← Π_cone(x̂ + u)          (PSD cone × nonnegative orthant)
//! u ← u + x̂ - z
//! ```
//!
//! The affine projection uses a Cholesky factor of `M Mᵀ` computed once,
//! after every constraint row has been rescaled to unit Frobenius norm.
//! The penalty does not enter the projection, so residual balancing can
//! change `ρ` freely.

use std::collections::VecDeque;

use crate::linalg::{cholesky, sym_eig, sym_eig_warm, Cholesky, Matrix, SymMatrix};
use crate::scalar::Real;

use super::{SdpConfig, SdpError, SdpProblem, SdpResult, SdpStatus, Sense};

const ADAPT_INTERVAL: usize = 25;
const ADAPT_RATIO: f64 = 10.0;
const RHO_MIN: f64 = 1e-6;
const RHO_MAX: f64 = 1e6;

struct SparseRow<T> {
    idx: Vec<usize>,
    val: Vec<T>,
}

impl<T: Real> SparseRow<T> {
    fn dot(&self, x: &[T]) -> T {
        self.idx.iter().zip(&self.val).map(|(&i, &v)| v * x[i]).sum()
    }
}

/// Scaled constraint system `M x = b` with its normal-matrix factor.
struct AffineSet<T> {
    rows: Vec<SparseRow<T>>,
    slack: Vec<Option<usize>>,
    rhs: Vec<T>,
    normal: Cholesky<T>,
    n_svec: usize,
    n_slack: usize,
}

impl<T: Real> AffineSet<T> {
    fn build(p: &SdpProblem<T>) -> Result<Self, SdpError> {
        let n_svec = p.dim() * (p.dim() + 1) / 2;
        let mut rows = Vec::with_capacity(p.constraints().len());
        let mut slack = Vec::with_capacity(p.constraints().len());
        let mut rhs = Vec::with_capacity(p.constraints().len());
        let mut n_slack = 0;
        for (k, c) in p.constraints().iter().enumerate() {
            let norm = c.matrix.frobenius_norm();
            if !(norm > T::zero()) {
                return Err(SdpError::DegenerateConstraints(format!(
                    "constraint {k} ({}) has a zero matrix",
                    c.label
                )));
            }
            let s = svec(&c.matrix);
            let (idx, val): (Vec<usize>, Vec<T>) = s
                .iter()
                .enumerate()
                .filter(|(_, &v)| v != T::zero())
                .map(|(i, &v)| (i, v / norm))
                .unzip();
            rows.push(SparseRow { idx, val });
            rhs.push(c.rhs / norm);
            slack.push(match c.sense {
                Sense::Ge => {
                    n_slack += 1;
                    Some(n_svec + n_slack - 1)
                }
                Sense::Eq => None,
            });
        }

        let m = rows.len();
        let mut dense = vec![T::zero(); n_svec];
        let mut normal = SymMatrix::zeros(m);
        for i in 0..m {
            for (&k, &v) in rows[i].idx.iter().zip(&rows[i].val) {
                dense[k] = v;
            }
            for j in 0..=i {
                let mut v = rows[j].dot(&dense);
                if i == j && slack[i].is_some() {
                    v += T::one();
                }
                normal.set(i, j, v);
            }
            for &k in &rows[i].idx {
                dense[k] = T::zero();
            }
        }
        let normal = cholesky(&normal)
            .map_err(|e| SdpError::DegenerateConstraints(format!("normal matrix: {e}")))?;
        Ok(Self {
            rows,
            slack,
            rhs,
            normal,
            n_svec,
            n_slack,
        })
    }

    fn len(&self) -> usize {
        self.n_svec + self.n_slack
    }

    /// `M y - b`
    fn residual(&self, y: &[T], out: &mut [T]) {
        for (i, row) in self.rows.iter().enumerate() {
            let mut r = row.dot(y) - self.rhs[i];
            if let Some(s) = self.slack[i] {
                r -= y[s];
            }
            out[i] = r;
        }
    }

    /// In-place Euclidean projection onto `{x : M x = b}`.
    fn project(&self, y: &mut [T], work: &mut [T]) {
        self.residual(y, work);
        self.normal.solve_in_place(work);
        for (i, row) in self.rows.iter().enumerate() {
            let l = work[i];
            for (&k, &v) in row.idx.iter().zip(&row.val) {
                y[k] -= l * v;
            }
            if let Some(s) = self.slack[i] {
                y[s] += l;
            }
        }
    }
}

fn svec_weight<T: Real>(i: usize, j: usize) -> T {
    if i == j {
        T::one()
    } else {
        T::lit(std::f64::consts::SQRT_2)
    }
}

/// Packed lower triangle with off-diagonal entries scaled by `√2`.
pub fn svec<T: Real>(m: &SymMatrix<T>) -> Vec<T> {
    let n = m.order();
    let mut out = Vec::with_capacity(n * (n + 1) / 2);
    for i in 0..n {
        for j in 0..=i {
            out.push(m.get(i, j) * svec_weight(i, j));
        }
    }
    out
}

/// Inverse of [`svec`].
pub fn smat<T: Real>(order: usize, v: &[T]) -> SymMatrix<T> {
    let mut data = Vec::with_capacity(v.len());
    let mut k = 0;
    for i in 0..order {
        for j in 0..=i {
            data.push(v[k] / svec_weight(i, j));
            k += 1;
        }
    }
    SymMatrix::from_packed(order, data)
}

struct PsdProjector<T> {
    order: usize,
    basis: Option<Matrix<T>>,
}

impl<T: Real> PsdProjector<T> {
    fn project(&mut self, v: &mut [T]) -> Result<(), SdpError> {
        let m = smat(self.order, v);
        let eig = match &self.basis {
            Some(b) => sym_eig_warm(&m, b).or_else(|_| sym_eig(&m))?,
            None => sym_eig(&m)?,
        };
        let projected = eig.recompose_with(|x| x.max(T::zero()));
        self.basis = Some(eig.vectors);
        v.copy_from_slice(&svec(&projected));
        Ok(())
    }
}

fn norm<T: Real>(x: &[T]) -> T {
    x.iter().map(|&v| v * v).sum::<T>().sqrt()
}

fn validate_config<T: Real>(cfg: &SdpConfig<T>) -> Result<(), SdpError> {
    if !(cfg.rho > T::zero() && cfg.rho.is_finite()) {
        return Err(SdpError::InvalidConfig(format!("rho = {} must be positive", cfg.rho)));
    }
    if !(cfg.tol > T::zero()) {
        return Err(SdpError::InvalidConfig(format!("tol = {} must be positive", cfg.tol)));
    }
    if !(cfg.over_relax > T::zero() && cfg.over_relax < T::lit(2.0)) {
        return Err(SdpError::InvalidConfig(format!(
            "over-relaxation {} outside (0, 2)",
            cfg.over_relax
        )));
    }
    if cfg.max_iter == 0 {
        return Err(SdpError::InvalidConfig("max_iter must be positive".into()));
    }
    Ok(())
}

/// Iterates `(z, u)` of the splitting together with the step's diagnostics.
struct Step<T> {
    x: Vec<T>,
    z: Vec<T>,
    u: Vec<T>,
}

struct Splitting<'a, T> {
    affine: &'a AffineSet<T>,
    psd: PsdProjector<T>,
    cost: Vec<T>,
    alpha: T,
    work: Vec<T>,
}

impl<T: Real> Splitting<'_, T> {
    /// One over-relaxed ADMM update from `(z, u)` into `out`.
    fn step(&mut self, z: &[T], u: &[T], rho: T, out: &mut Step<T>) -> Result<(), SdpError> {
        let n = z.len();
        let ns = self.affine.n_svec;
        for i in 0..n {
            out.x[i] = z[i] - u[i] - self.cost[i] / rho;
        }
        self.affine.project(&mut out.x, &mut self.work);
        for i in 0..n {
            out.z[i] = self.alpha * out.x[i] + (T::one() - self.alpha) * z[i] + u[i];
        }
        self.psd.project(&mut out.z[..ns])?;
        for zi in &mut out.z[ns..] {
            *zi = zi.max(T::zero());
        }
        for i in 0..n {
            let relaxed = self.alpha * out.x[i] + (T::one() - self.alpha) * z[i];
            out.u[i] = u[i] + relaxed - out.z[i];
        }
        Ok(())
    }
}

/// Type-II Anderson acceleration on the stacked fixed-point variable `(z, u)`.
struct Anderson<T> {
    memory: usize,
    /// Differences of consecutive residuals `g = f(v) - v` and of images `f(v)`.
    dg: VecDeque<Vec<T>>,
    df: VecDeque<Vec<T>>,
    /// `gram[i][j] = ⟨dg_i, dg_j⟩`, kept in step with `dg`.
    gram: VecDeque<VecDeque<T>>,
    last_g: Option<Vec<T>>,
    last_f: Option<Vec<T>>,
}

impl<T: Real> Anderson<T> {
    fn new(memory: usize) -> Self {
        Self {
            memory,
            dg: VecDeque::with_capacity(memory),
            df: VecDeque::with_capacity(memory),
            gram: VecDeque::with_capacity(memory),
            last_g: None,
            last_f: None,
        }
    }

    fn reset(&mut self) {
        self.dg.clear();
        self.df.clear();
        self.gram.clear();
        self.last_g = None;
        self.last_f = None;
    }

    /// Records `f = f(v)`, `g = f - v` and returns the extrapolated point, if any.
    fn update(&mut self, f: &[T], g: &[T]) -> Option<Vec<T>> {
        if self.memory == 0 {
            return None;
        }
        let dot = |a: &[T], b: &[T]| a.iter().zip(b).map(|(&x, &y)| x * y).sum::<T>();
        if let (Some(lg), Some(lf)) = (&self.last_g, &self.last_f) {
            if self.dg.len() == self.memory {
                self.dg.pop_front();
                self.df.pop_front();
                self.gram.pop_front();
                for row in &mut self.gram {
                    row.pop_front();
                }
            }
            let new: Vec<T> = g.iter().zip(lg).map(|(&a, &b)| a - b).collect();
            let mut row: VecDeque<T> = self.dg.iter().map(|d| dot(d, &new)).collect();
            for (r, &v) in self.gram.iter_mut().zip(&row) {
                r.push_back(v);
            }
            row.push_back(dot(&new, &new));
            self.gram.push_back(row);
            self.dg.push_back(new);
            self.df.push_back(f.iter().zip(lf).map(|(&a, &b)| a - b).collect());
        }
        self.last_g = Some(g.to_vec());
        self.last_f = Some(f.to_vec());
        let m = self.dg.len();
        if m == 0 {
            return None;
        }
        let trace: T = (0..m).map(|i| self.gram[i][i]).sum();
        if !(trace > T::zero()) || !trace.is_finite() {
            self.reset();
            return None;
        }
        let reg = T::lit(1e-10) * trace;
        let gram = Matrix::from_fn(m, m, |i, j| self.gram[i][j] + if i == j { reg } else { T::zero() });
        let rhs: Vec<T> = (0..m).map(|i| dot(&self.dg[i], g)).collect();
        let gamma = match gram.solve(&rhs) {
            Ok(v) if v.is_finite() => v,
            _ => {
                self.reset();
                return None;
            }
        };
        let mut out = f.to_vec();
        for (k, &gk) in gamma.iter().enumerate() {
            for (o, &d) in out.iter_mut().zip(&self.df[k]) {
                *o -= gk * d;
            }
        }
        Some(out)
    }
}

/// Accelerated steps are rejected when they grow the fixed-point residual
/// beyond this factor of the last plain step's residual.
const SAFEGUARD: f64 = 1.0;

/// Runs ADMM until the scaled residuals fall below `tol` or the iteration cap
/// is reached; the status field says which.
pub fn run_admm<T: Real>(p: &SdpProblem<T>, cfg: &SdpConfig<T>) -> Result<SdpResult<T>, SdpError> {
    validate_config(cfg)?;
    let affine = AffineSet::build(p)?;
    let n = affine.len();
    let ns = affine.n_svec;

    let c_norm = p.objective().frobenius_norm();
    let c_scale = if c_norm > T::zero() { T::one() / c_norm } else { T::one() };
    let mut cost = vec![T::zero(); n];
    for (dst, src) in cost.iter_mut().zip(svec(p.objective())) {
        *dst = src * c_scale;
    }
    let cost_norm = norm(&cost);

    let mut split = Splitting {
        affine: &affine,
        psd: PsdProjector {
            order: p.dim(),
            basis: None,
        },
        cost,
        alpha: cfg.over_relax,
        work: vec![T::zero(); p.constraints().len()],
    };
    let mut aa = Anderson::new(cfg.anderson_memory);
    let mut z = vec![T::zero(); n];
    let mut u = vec![T::zero(); n];
    let mut step = Step {
        x: vec![T::zero(); n],
        z: vec![T::zero(); n],
        u: vec![T::zero(); n],
    };
    // Plain image of the last accepted point and its residual norm.
    let mut fallback: Option<(Vec<T>, Vec<T>, T)> = None;
    let mut rho = cfg.rho;
    let window = cfg.average_window.max(1);
    let mut recent: VecDeque<Vec<T>> = VecDeque::with_capacity(window);

    let mut iterations = 0;
    let mut primal = T::infinity();
    let mut dual = T::infinity();
    let mut status = SdpStatus::IterationCap;
    while iterations < cfg.max_iter {
        iterations += 1;
        split.step(&z, &u, rho, &mut step)?;
        let g: Vec<T> = step
            .z
            .iter()
            .zip(&z)
            .chain(step.u.iter().zip(&u))
            .map(|(&a, &b)| a - b)
            .collect();
        let g_norm = norm(&g);

        if let Some((fz, fu, prev)) = fallback.take() {
            if !(g_norm <= T::lit(SAFEGUARD) * prev) {
                // Extrapolation did not help; restart from the plain image.
                z = fz;
                u = fu;
                aa.reset();
                iterations -= 1;
                continue;
            }
        }

        if recent.len() == window {
            recent.pop_front();
        }
        recent.push_back(step.z[..ns].to_vec());

        let r_p: T = step.x.iter().zip(&step.z).map(|(&a, &b)| (a - b) * (a - b)).sum::<T>().sqrt();
        let r_d: T = rho * step.z.iter().zip(&z).map(|(&a, &b)| (a - b) * (a - b)).sum::<T>().sqrt();
        primal = r_p / (T::one() + norm(&step.x).max(norm(&step.z)));
        dual = r_d / (T::one() + cost_norm.max(rho * norm(&step.u)));
        if primal <= cfg.tol && dual <= cfg.tol {
            status = SdpStatus::Optimal;
            z.copy_from_slice(&step.z);
            break;
        }

        let mut new_rho = rho;
        if cfg.adaptive_rho && iterations % ADAPT_INTERVAL == 0 {
            let ratio = T::lit(ADAPT_RATIO);
            if primal > ratio * dual {
                new_rho = (rho + rho).min(T::lit(RHO_MAX));
            } else if dual > ratio * primal {
                new_rho = (rho / T::lit(2.0)).max(T::lit(RHO_MIN));
            }
        }
        if new_rho != rho {
            let f = rho / new_rho;
            for ui in &mut step.u {
                *ui *= f;
            }
            rho = new_rho;
            aa.reset();
            z.copy_from_slice(&step.z);
            u.copy_from_slice(&step.u);
            continue;
        }

        let image: Vec<T> = step.z.iter().chain(&step.u).copied().collect();
        match aa.update(&image, &g) {
            Some(v) if v.iter().all(|a| a.is_finite()) => {
                fallback = Some((step.z.clone(), step.u.clone(), g_norm));
                z.copy_from_slice(&v[..n]);
                u.copy_from_slice(&v[n..]);
            }
            _ => {
                z.copy_from_slice(&step.z);
                u.copy_from_slice(&step.u);
            }
        }
    }

    let mut mean = vec![T::zero(); ns];
    for v in &recent {
        for (m, &x) in mean.iter_mut().zip(v) {
            *m += x;
        }
    }
    let inv = T::one() / T::of_usize(recent.len().max(1));
    for m in &mut mean {
        *m *= inv;
    }
    let averaged = smat(p.dim(), &mean);
    let last = smat(p.dim(), &step.z[..ns]);
    let g = if !recent.is_empty() && p.max_violation(&averaged) <= p.max_violation(&last) {
        averaged
    } else {
        last
    };
    let objective_value = p.objective().dot(&g);
    Ok(SdpResult {
        g,
        objective_value,
        primal_residual: primal,
        dual_residual: dual,
        iterations,
        status,
    })
}

/// [`run_admm`], failing with [`SdpError::SolverFailed`] at the iteration cap.
pub fn solve<T: Real>(p: &SdpProblem<T>, cfg: &SdpConfig<T>) -> Result<SdpResult<T>, SdpError> {
    let result = run_admm(p, cfg)?;
    match result.status {
        SdpStatus::Optimal => Ok(result),
        SdpStatus::IterationCap => Err(SdpError::SolverFailed {
            iterations: result.iterations,
            primal_residual: result.primal_residual.to_f64_lossy(),
            dual_residual: result.dual_residual.to_f64_lossy(),
            objective: result.objective_value.to_f64_lossy(),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sdp::Constraint;

    #[test]
    fn svec_preserves_inner_product() {
        let a = SymMatrix::<f64>::from_fn(4, |i, j| (i as f64) - 0.5 * j as f64 + 1.0);
        let b = SymMatrix::<f64>::from_fn(4, |i, j| ((i + 2 * j) % 3) as f64 - 1.0);
        let dot: f64 = svec(&a).iter().zip(svec(&b)).map(|(x, y)| x * y).sum();
        assert!((dot - a.dot(&b)).abs() < 1e-12);
        assert!(smat(4, &svec(&a)).sub(&a).max_abs() < 1e-15);
    }

    #[test]
    fn min_eigenvalue_of_diag() {
        let p = SdpProblem::new(
            SymMatrix::from_diag(&[1.0, -1.0]),
            vec![Constraint::new(SymMatrix::identity(2), Sense::Eq, 1.0)],
        )
        .unwrap();
        let r = solve(&p, &SdpConfig::<f64>::default()).unwrap();
        assert!((r.objective_value + 1.0).abs() < 1e-6);
        assert!(r.g.sub(&SymMatrix::from_diag(&[0.0, 1.0])).frobenius_norm() < 1e-5);
    }

    #[test]
    fn constant_objective_on_unit_trace() {
        let p = SdpProblem::new(
            SymMatrix::identity(3),
            vec![Constraint::new(SymMatrix::identity(3), Sense::Eq, 1.0)],
        )
        .unwrap();
        let r = solve(&p, &SdpConfig::<f64>::default()).unwrap();
        assert!((r.objective_value - 1.0).abs() < 1e-7, "{:?}", (r.objective_value, r.iterations, r.primal_residual, r.dual_residual));
    }

    #[test]
    fn zero_constraint_is_degenerate() {
        let p = SdpProblem::new(
            SymMatrix::identity(2),
            vec![Constraint::new(SymMatrix::zeros(2), Sense::Ge, 0.0)],
        )
        .unwrap();
        assert!(matches!(
            solve(&p, &SdpConfig::<f64>::default()),
            Err(SdpError::DegenerateConstraints(_))
        ));
    }

    #[test]
    fn duplicate_equalities_are_degenerate() {
        let c = Constraint::new(SymMatrix::identity(2), Sense::Eq, 1.0);
        let p = SdpProblem::new(SymMatrix::identity(2), vec![c.clone(), c]).unwrap();
        assert!(matches!(
            solve(&p, &SdpConfig::<f64>::default()),
            Err(SdpError::DegenerateConstraints(_))
        ));
    }

    #[test]
    fn iteration_cap_is_reported() {
        let p = SdpProblem::new(
            SymMatrix::from_diag(&[1.0, -1.0, 0.3]),
            vec![Constraint::new(SymMatrix::identity(3), Sense::Eq, 1.0)],
        )
        .unwrap();
        let cfg = SdpConfig {
            max_iter: 2,
            ..SdpConfig::<f64>::default()
        };
        assert_eq!(run_admm(&p, &cfg).unwrap().status, SdpStatus::IterationCap);
        assert!(matches!(solve(&p, &cfg), Err(SdpError::SolverFailed { iterations: 2, .. })));
    }

    #[test]
    fn rejects_bad_config() {
        let p = SdpProblem::new(
            SymMatrix::identity(2),
            vec![Constraint::new(SymMatrix::identity(2), Sense::Eq, 1.0)],
        )
        .unwrap();
        for cfg in [
            SdpConfig { rho: 0.0, ..SdpConfig::<f64>::default() },
            SdpConfig { over_relax: 2.0, ..SdpConfig::<f64>::default() },
            SdpConfig { tol: -1.0, ..SdpConfig::<f64>::default() },
        ] {
            assert!(matches!(solve(&p, &cfg), Err(SdpError::InvalidConfig(_))));
        }
    }

    #[test]
    fn inequality_constraints_are_respected() {
        // min G00 s.t. G00 + G11 = 1, G00 ≥ 0.25
        let mut a = SymMatrix::zeros(2);
        a.set(0, 0, 1.0);
        let p = SdpProblem::new(
            a.clone(),
            vec![
                Constraint::new(SymMatrix::identity(2), Sense::Eq, 1.0),
                Constraint::new(a, Sense::Ge, 0.25),
            ],
        )
        .unwrap();
        let r = solve(&p, &SdpConfig::<f64>::default()).unwrap();
        assert!((r.objective_value - 0.25).abs() < 1e-6);
    }

    #[test]
    fn deterministic() {
        let p = SdpProblem::new(
            SymMatrix::from_rows(&[vec![0.3, 1.0, -0.2], vec![1.0, -0.5, 0.4], vec![-0.2, 0.4, 0.1]]),
            vec![Constraint::new(SymMatrix::identity(3), Sense::Eq, 1.0)],
        )
        .unwrap();
        let a = solve(&p, &SdpConfig::<f64>::default()).unwrap();
        let b = solve(&p, &SdpConfig::<f64>::default()).unwrap();
        assert_eq!(a.iterations, b.iterations);
        assert_eq!(a.objective_value.to_bits(), b.objective_value.to_bits());
        assert_eq!(a.g, b.g);
    }
}
