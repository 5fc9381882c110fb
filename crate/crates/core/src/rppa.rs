//! The relaxed proximal point driver and the scaling/translation maps under
//! which its ergodic performance measure is invariant.
//!
//! One iteration: `w̃_k` solves the proximal VI at `w_k`, then
//! `w_{k+1} = w_k + λ (w̃_k - w_k)`. After `N + 1` steps the ergodic
//! average is `w̄_N = (1/(N+1)) Σ_{k=0..N} w̃_k`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linalg::Vector;
use crate::operators::{ConstraintSet, OperatorError, ViProblem};
use crate::scalar::Real;

/// Number of random probe points added around a trajectory.
pub const RANDOM_PROBES: usize = 50;

/// Recorded run: `w₀ … w_{N+1}`, `w̃₀ … w̃_N`, and `w̄_N`.
#[derive(Debug, Clone)]
pub struct Trajectory<T = f64> {
    pub w: Vec<Vector<T>>,
    pub w_tilde: Vec<Vector<T>>,
    pub average: Vector<T>,
    pub relaxation: T,
    pub iterations: usize,
}

impl<T: Real> Trajectory<T> {
    pub fn start(&self) -> &Vector<T> {
        &self.w[0]
    }

    pub fn last(&self) -> &Vector<T> {
        &self.w[self.w.len() - 1]
    }
}

/// Runs `N + 1` proximal steps (`k = 0..=N`) from the problem's start point.
pub fn run<T: Real>(p: &ViProblem<T>, iterations: usize) -> Result<Trajectory<T>, OperatorError> {
    let lambda = p.relaxation();
    let mut w = Vec::with_capacity(iterations + 2);
    let mut w_tilde = Vec::with_capacity(iterations + 1);
    w.push(p.start().clone());
    for k in 0..=iterations {
        let wk = &w[k];
        let wt = p.checked_step(wk)?;
        let mut next = wk.clone();
        next.axpy(lambda, &(&wt - wk));
        w_tilde.push(wt);
        w.push(next);
    }
    let average = Vector::mean(&w_tilde);
    Ok(Trajectory {
        w,
        w_tilde,
        average,
        relaxation: lambda,
        iterations,
    })
}

/// `(w̄_N - w)ᵀ F(w)`
pub fn ergodic_gap<T: Real>(t: &Trajectory<T>, p: &ViProblem<T>, w: &[T]) -> Result<T, OperatorError> {
    let fw = p.evaluate(w)?;
    Ok(t.average
        .iter()
        .zip(w)
        .zip(fw.iter())
        .map(|((&a, &x), &f)| (a - x) * f)
        .sum())
}

/// `(w̄_N - w)ᵀ F(w) / ‖w - w₀‖²_H`; `None` when `w = w₀`.
pub fn performance_ratio<T: Real>(
    t: &Trajectory<T>,
    p: &ViProblem<T>,
    w: &[T],
) -> Result<Option<T>, OperatorError> {
    let gap = ergodic_gap(t, p, w)?;
    let d: Vector<T> = w.iter().zip(t.start().iter()).map(|(&a, &b)| a - b).collect();
    let denom = p.h_norm_sq(&d);
    Ok(if denom > T::zero() { Some(gap / denom) } else { None })
}

/// Rescales by `R > 0`: operator `F(R u)/R`, set `Ω/R`, start `w₀/R`.
pub fn scale_problem<T: Real>(p: &ViProblem<T>, factor: T) -> Result<ViProblem<T>, OperatorError> {
    if !(factor > T::zero() && factor.is_finite()) {
        return Err(OperatorError::InvalidParameter(format!(
            "scale factor {factor} must be positive"
        )));
    }
    ViProblem::new(
        p.operator().scaled(factor),
        p.set().scaled(factor),
        p.metric().clone(),
        p.relaxation(),
        p.start().scaled(T::one() / factor),
    )
}

/// Shifts the origin to `shift`: operator `F(u + shift)`, set `Ω - shift`, start `w₀ - shift`.
pub fn translate_problem<T: Real>(
    p: &ViProblem<T>,
    shift: &[T],
) -> Result<ViProblem<T>, OperatorError> {
    if shift.len() != p.dim() {
        return Err(OperatorError::DimensionMismatch {
            expected: p.dim(),
            found: shift.len(),
        });
    }
    ViProblem::new(
        p.operator().translated(shift),
        p.set().translated(shift),
        p.metric().clone(),
        p.relaxation(),
        p.start().iter().zip(shift).map(|(&a, &s)| a - s).collect(),
    )
}

/// Deterministic probe set for checking `∀ w ∈ Ω` bounds: `w₀`, `w̄_N`
/// (projected into Ω), every `w̃_k`, and [`RANDOM_PROBES`] seeded points
/// drawn from the box `w₀ ± 3‖w₀ - w̃_N‖` and projected into Ω.
pub fn probe_points<T: Real>(t: &Trajectory<T>, set: &ConstraintSet<T>, seed: u64) -> Vec<Vector<T>> {
    let start = t.start();
    let mut probes = vec![set.project(start), set.project(&t.average)];
    probes.extend(t.w_tilde.iter().cloned());
    let spread = (start - &t.w_tilde[t.w_tilde.len() - 1]).norm();
    let radius = if spread > T::zero() {
        T::lit(3.0) * spread
    } else {
        T::one()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..RANDOM_PROBES {
        let point: Vector<T> = start
            .iter()
            .map(|&c| c + radius * T::lit(rng.gen_range(-1.0..=1.0)))
            .collect();
        probes.push(set.project(&point));
    }
    probes
}
