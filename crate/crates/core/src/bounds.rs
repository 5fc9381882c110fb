//! Analytic ergodic-rate bounds and a step-by-step numeric audit of the
//! argument that establishes the optimal one.

use serde::Serialize;

use crate::linalg::Vector;
use crate::operators::{OperatorError, ViProblem};
use crate::rppa::{ergodic_gap, Trajectory};
use crate::scalar::Real;

/// Absolute slack for the scalar proof inequality.
pub const PROOF_SLACK: f64 = 1e-12;
/// Slack for chain inequalities, relative to the run's squared distances.
pub const CHAIN_SLACK: f64 = 1e-9;
/// Absolute slack for rate bounds at probe points.
pub const BOUND_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ParamError {
    #[error("iteration count N = {0} must be at least 1")]
    Iterations(usize),
    #[error("relaxation λ = {0} outside (0, 2)")]
    Relaxation(f64),
}

pub fn validate_params<T: Real>(iterations: usize, relaxation: T) -> Result<(), ParamError> {
    if iterations < 1 {
        return Err(ParamError::Iterations(iterations));
    }
    if !(relaxation > T::zero() && relaxation < T::lit(2.0)) {
        return Err(ParamError::Relaxation(relaxation.to_f64_lossy()));
    }
    Ok(())
}

/// `1 / (2λ(N+1))`
pub fn bound_classic<T: Real>(iterations: usize, relaxation: T) -> Result<T, ParamError> {
    validate_params(iterations, relaxation)?;
    Ok(T::one() / (T::lit(2.0) * relaxation * T::of_usize(iterations + 1)))
}

/// `1 / (2(λN+2))`
pub fn bound_optimal<T: Real>(iterations: usize, relaxation: T) -> Result<T, ParamError> {
    validate_params(iterations, relaxation)?;
    Ok(T::one() / (T::lit(2.0) * (relaxation * T::of_usize(iterations) + T::lit(2.0))))
}

/// `κ = (2-λ)/(λN)`, the weight on `B²` in the scalar inequality.
fn kappa<T: Real>(iterations: usize, relaxation: T) -> T {
    (T::lit(2.0) - relaxation) / (relaxation * T::of_usize(iterations))
}

/// Right-hand side `(2-λ)/(λN+2)`.
fn proof_target<T: Real>(iterations: usize, relaxation: T) -> T {
    (T::lit(2.0) - relaxation) / (relaxation * T::of_usize(iterations) + T::lit(2.0))
}

/// `A² + κB² - (2-λ)/(λN+2)`; nonnegative whenever `A, B ≥ 0` and `A + B ≥ 1`.
pub fn proof_inequality_slack<T: Real>(relaxation: T, iterations: usize, a: T, b: T) -> T {
    a * a + kappa(iterations, relaxation) * b * b - proof_target(iterations, relaxation)
}

/// Minimizer `B* = (1 + κ)⁻¹` of `(1-B)² + κB²`.
pub fn proof_minimizer<T: Real>(relaxation: T, iterations: usize) -> T {
    T::one() / (T::one() + kappa(iterations, relaxation))
}

/// Lower bound used when `B ≥ 1`: `A² + κB² ≥ κ`.
pub fn lower_bound_large_b<T: Real>(relaxation: T, iterations: usize) -> T {
    kappa(iterations, relaxation)
}

/// Lower bound used when `0 ≤ B < 1`: `A² + κB² ≥ (1+κ)B² - 2B + 1`.
pub fn lower_bound_small_b<T: Real>(relaxation: T, iterations: usize, b: T) -> T {
    (T::one() + kappa(iterations, relaxation)) * b * b - (b + b) + T::one()
}

/// Smallest slack over `samples` plus the analytic minimizer. Samples
/// outside `A, B ≥ 0, A + B ≥ 1` are skipped.
pub fn min_proof_slack<T: Real>(
    relaxation: T,
    iterations: usize,
    samples: &[(T, T)],
) -> Result<T, ParamError> {
    validate_params(iterations, relaxation)?;
    let b_star = proof_minimizer(relaxation, iterations);
    let minimizer = (T::one() - b_star, b_star);
    Ok(samples
        .iter()
        .copied()
        .filter(|&(a, b)| a >= T::zero() && b >= T::zero() && a + b >= T::one())
        .chain(std::iter::once(minimizer))
        .map(|(a, b)| proof_inequality_slack(relaxation, iterations, a, b))
        .fold(T::infinity(), T::min))
}

/// True iff the scalar inequality holds within [`PROOF_SLACK`] at every sample.
pub fn check_proof_inequality<T: Real>(
    relaxation: T,
    iterations: usize,
    samples: &[(T, T)],
) -> Result<bool, ParamError> {
    Ok(min_proof_slack(relaxation, iterations, samples)? >= -T::lit(PROOF_SLACK))
}

/// Per-step quantities of the chain
///
/// ```text
/// ⟨w̃_k - w, F(w)⟩ ≤ ⟨w̃_k - w, F(w̃_k)⟩ ≤ (w - w̃_k)ᵀH(w̃_k - w_k)
///   = (w - w_k)ᵀH(w̃_k - w_k) - ‖w̃_k - w_k‖²_H
///   = (1/2λ)[‖w-w_k‖² - ‖w-w_{k+1}‖² + ‖w_{k+1}-w_k‖²] - (1/λ²)‖w_{k+1}-w_k‖²
/// ```
#[derive(Debug, Clone, Serialize)]
pub struct StepTerms<T = f64> {
    pub k: usize,
    pub gap_at_reference: T,
    pub gap_at_iterate: T,
    pub proximal_bound: T,
    pub expanded: T,
    pub three_term: T,
}

/// Aggregated chain over `k = 0..=N`:
///
/// ```text
/// (N+1)⟨w̄_N - w, F(w)⟩
///   ≤ (1/2λ)[‖w-w₀‖² - ‖w-w_{N+1}‖²] - (2-λ)/(2λ²) Σ‖w_{k+1}-w_k‖²            (telescoped)
///   ≤ (1/2λ)[‖w-w₀‖² - ‖w-w_{N+1}‖²] - (2-λ)/(2λ²(N+1)) (Σ‖w_{k+1}-w_k‖)²     (Cauchy-Schwarz)
///   ≤ (1/2λ)[‖w-w₀‖² - ‖w-w_{N+1}‖²] - (2-λ)/(2λ²(N+1)) ‖w_{N+1}-w₀‖²         (triangle)
///   ≤ (N+1)/(2(λN+2)) ‖w-w₀‖²                                                  (final)
/// ```
///
/// The Cauchy-Schwarz step runs over the `N + 1` increments, hence the
/// `N + 1` denominator; the last step then reduces to `A² + κ'B² ≥ (2-λ)/(λN+2)`
/// with `κ' = (2-λ)/(λ(N+1))`, `A = ‖w-w_{N+1}‖/‖w-w₀‖`, `B = ‖w_{N+1}-w₀‖/‖w-w₀‖`.
#[derive(Debug, Clone, Serialize)]
pub struct AggregateChain<T = f64> {
    pub weighted_gap: T,
    pub telescoped: T,
    pub cauchy_schwarz: T,
    pub triangle: T,
    pub final_bound: T,
    pub a: Option<T>,
    pub b: Option<T>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TelescopingLedger<T = f64> {
    pub steps: Vec<StepTerms<T>>,
    pub aggregate: AggregateChain<T>,
    /// Normalizer for all comparisons.
    pub scale: T,
    /// Most negative scaled slack over every `≤` and `=` in the chain.
    pub worst_slack: T,
    pub holds: bool,
}

/// Evaluates every quantity of the optimal-rate argument on a recorded run
/// and checks each inequality and identity within [`CHAIN_SLACK`].
pub fn check_telescoping<T: Real>(
    t: &Trajectory<T>,
    p: &ViProblem<T>,
    w: &[T],
) -> Result<TelescopingLedger<T>, OperatorError> {
    let lambda = t.relaxation;
    let n = t.iterations;
    let fw = p.evaluate(w)?;
    let w_vec = Vector::from_slice(w);
    let hn = |x: &Vector<T>| p.h_norm_sq(x);
    let hi = |x: &Vector<T>, y: &Vector<T>| p.metric().bilinear(x, y);
    let two = T::lit(2.0);

    let mut steps = Vec::with_capacity(n + 1);
    let mut sum_sq = T::zero();
    let mut sum_norm = T::zero();
    for k in 0..=n {
        let wk = &t.w[k];
        let wk1 = &t.w[k + 1];
        let wt = &t.w_tilde[k];
        let ft = p.evaluate(wt)?;
        let d_tilde = wt - &w_vec;
        let step = wt - wk;
        let inc = wk1 - wk;
        let inc_sq = hn(&inc);
        sum_sq += inc_sq;
        sum_norm += inc_sq.sqrt();
        steps.push(StepTerms {
            k,
            gap_at_reference: d_tilde.dot(&fw),
            gap_at_iterate: d_tilde.dot(&ft),
            proximal_bound: hi(&(&w_vec - wt), &step),
            expanded: hi(&(&w_vec - wk), &step) - hn(&step),
            three_term: (hn(&(&w_vec - wk)) - hn(&(&w_vec - wk1)) + inc_sq) / (two * lambda)
                - inc_sq / (lambda * lambda),
        });
    }

    let dist0 = hn(&(&w_vec - t.start()));
    let dist_end = hn(&(&w_vec - t.last()));
    let travel = hn(&(t.last() - t.start()));
    let np1 = T::of_usize(n + 1);
    let head = (dist0 - dist_end) / (two * lambda);
    let shrink = (two - lambda) / (two * lambda * lambda);
    let aggregate = AggregateChain {
        weighted_gap: np1 * ergodic_gap(t, p, w)?,
        telescoped: head - shrink * sum_sq,
        cauchy_schwarz: head - shrink * sum_norm * sum_norm / np1,
        triangle: head - shrink * travel / np1,
        final_bound: np1 * dist0 / (two * (lambda * T::of_usize(n) + two)),
        a: (dist0 > T::zero()).then(|| (dist_end / dist0).sqrt()),
        b: (dist0 > T::zero()).then(|| (travel / dist0).sqrt()),
    };

    let scale = dist0.max(sum_sq).max(T::min_positive_value().sqrt());
    let le = |lhs: T, rhs: T| (rhs - lhs) / scale;
    let eq = |lhs: T, rhs: T| -(rhs - lhs).abs() / scale;
    let mut slacks = Vec::with_capacity(4 * steps.len() + 5);
    for s in &steps {
        slacks.push(le(s.gap_at_reference, s.gap_at_iterate));
        slacks.push(le(s.gap_at_iterate, s.proximal_bound));
        slacks.push(eq(s.proximal_bound, s.expanded));
        slacks.push(eq(s.expanded, s.three_term));
    }
    let step_sum: T = steps.iter().map(|s| s.three_term).sum();
    slacks.push(eq(step_sum, aggregate.telescoped));
    slacks.push(le(aggregate.weighted_gap, aggregate.telescoped));
    slacks.push(le(aggregate.telescoped, aggregate.cauchy_schwarz));
    slacks.push(le(aggregate.cauchy_schwarz, aggregate.triangle));
    slacks.push(le(aggregate.triangle, aggregate.final_bound));
    let worst_slack = slacks.into_iter().fold(T::infinity(), T::min);
    Ok(TelescopingLedger {
        holds: worst_slack >= -T::lit(CHAIN_SLACK),
        steps,
        aggregate,
        scale,
        worst_slack,
    })
}

/// Largest excess of `(w̄_N - w)ᵀF(w)` over each rate bound at the probes.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BoundCheck<T = f64> {
    pub max_excess_classic: T,
    pub max_excess_optimal: T,
    pub probes: usize,
}

impl<T: Real> BoundCheck<T> {
    pub fn classic_holds(&self) -> bool {
        self.max_excess_classic <= T::lit(BOUND_SLACK)
    }

    pub fn optimal_holds(&self) -> bool {
        self.max_excess_optimal <= T::lit(BOUND_SLACK)
    }
}

pub fn check_rate_bounds<T: Real>(
    t: &Trajectory<T>,
    p: &ViProblem<T>,
    probes: &[Vector<T>],
) -> Result<BoundCheck<T>, OperatorError> {
    let classic = bound_classic(t.iterations.max(1), t.relaxation)
        .map_err(|e| OperatorError::InvalidParameter(e.to_string()))?;
    let optimal = bound_optimal(t.iterations.max(1), t.relaxation)
        .map_err(|e| OperatorError::InvalidParameter(e.to_string()))?;
    let mut check = BoundCheck {
        max_excess_classic: T::neg_infinity(),
        max_excess_optimal: T::neg_infinity(),
        probes: probes.len(),
    };
    for w in probes {
        let gap = ergodic_gap(t, p, w)?;
        let d = p.h_norm_sq(&(w - t.start()));
        check.max_excess_classic = check.max_excess_classic.max(gap - classic * d);
        check.max_excess_optimal = check.max_excess_optimal.max(gap - optimal * d);
    }
    Ok(check)
}

/// One row of the rate comparison table.
#[derive(Debug, Clone, Serialize)]
pub struct RateReport {
    #[serde(rename = "N")]
    pub iterations: usize,
    pub lambda: f64,
    pub eps_pep: f64,
    pub bound_classic: f64,
    pub bound_optimal: f64,
    pub lower_example: f64,
    pub abs_gap: f64,
    pub rel_gap: f64,
}

impl RateReport {
    pub fn new(iterations: usize, lambda: f64, eps_pep: f64, lower_example: f64) -> Result<Self, ParamError> {
        let classic = bound_classic(iterations, lambda)?;
        let optimal = bound_optimal(iterations, lambda)?;
        let abs_gap = (eps_pep - optimal).abs();
        Ok(Self {
            iterations,
            lambda,
            eps_pep,
            bound_classic: classic,
            bound_optimal: optimal,
            lower_example,
            abs_gap,
            rel_gap: abs_gap / optimal,
        })
    }

    /// `bound_optimal - tol ≤ eps_pep ≤ bound_classic + tol`
    pub fn sandwich_holds(&self, tol: f64) -> bool {
        self.eps_pep >= self.bound_optimal - tol && self.eps_pep <= self.bound_classic + tol
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bound_values() {
        assert!((bound_classic::<f64>(1, 1.5).unwrap() - 1.0 / 6.0).abs() < 1e-15);
        assert!((bound_classic::<f64>(49, 1.5).unwrap() - 1.0 / 150.0).abs() < 1e-15);
        assert!((bound_optimal::<f64>(1, 1.5).unwrap() - 1.0 / 7.0).abs() < 1e-15);
        assert!((bound_optimal::<f64>(100, 1.5).unwrap() - 1.0 / 304.0).abs() < 1e-15);
        assert!((bound_classic::<f64>(10, 1.5).unwrap() - 1.0 / 33.0).abs() < 1e-15);
        assert!((bound_optimal::<f64>(10, 1.5).unwrap() - 1.0 / 34.0).abs() < 1e-15);
    }

    #[test]
    fn doubling_horizon_halves_classic_bound() {
        let a = bound_classic::<f64>(4, 0.8).unwrap();
        let b = bound_classic::<f64>(9, 0.8).unwrap();
        assert!((a - 2.0 * b).abs() < 1e-15);
    }

    #[test]
    fn parameter_violations() {
        assert_eq!(bound_classic(0, 1.0), Err(ParamError::Iterations(0)));
        assert_eq!(bound_optimal(1, 2.0), Err(ParamError::Relaxation(2.0)));
        assert!(bound_optimal(1, f64::NAN).is_err());
    }

    #[test]
    fn proof_inequality_endpoints_and_minimizer() {
        for (lam, n) in [(0.1, 1), (1.5, 2), (1.9, 20)] {
            assert!(proof_inequality_slack(lam, n, 1.0, 0.0) > 0.0);
            assert!(proof_inequality_slack(lam, n, 0.0, 1.0) > 0.0);
        }
        let b_star: f64 = proof_minimizer(1.5, 2);
        assert!((b_star - 6.0 / 7.0).abs() < 1e-15);
        let at_min = (1.0 - b_star).powi(2) + (0.5 / 3.0) * b_star * b_star;
        assert!((at_min - 1.0 / 7.0).abs() < 1e-15);
        assert!(check_proof_inequality(1.5, 2, &[]).unwrap());
    }

    #[test]
    fn branch_bounds_agree_at_b_equal_one() {
        for (lam, n) in [(0.5, 1), (1.0, 7), (1.9, 30)] {
            let big: f64 = lower_bound_large_b(lam, n);
            let small = lower_bound_small_b(lam, n, 1.0);
            assert!((big - small).abs() < 1e-15);
        }
    }

    #[test]
    fn out_of_domain_samples_are_ignored() {
        // A + B < 1 would violate the inequality but is outside its hypothesis.
        assert!(check_proof_inequality(1.0, 1, &[(0.1, 0.1)]).unwrap());
        assert!(proof_inequality_slack(1.0, 1, 0.1, 0.1) < 0.0);
    }

    #[test]
    fn optimal_below_classic() {
        for lam in [0.1, 0.5, 1.0, 1.5, 1.9] {
            for n in 1..=50 {
                assert!(bound_optimal(n, lam).unwrap() <= bound_classic(n, lam).unwrap());
            }
        }
    }

    #[test]
    fn report_columns() {
        let r = RateReport::new(10, 1.5, 1.0 / 34.0 + 1e-6, 1.0 / 34.0).unwrap();
        assert!((r.abs_gap - 1e-6).abs() < 1e-15);
        assert!(r.sandwich_holds(1e-4));
        assert!(!RateReport::new(10, 1.5, 0.02, 1.0 / 34.0).unwrap().sandwich_holds(1e-4));
    }

    #[test]
    fn chain_is_tight_on_the_worst_case_instance() {
        use crate::example::WorstCaseCertificate;
        for (n, lam) in [(1, 1.5), (2, 1.5), (5, 0.7), (10, 1.9)] {
            let cert = WorstCaseCertificate::<f64>::default_for(n, lam).unwrap();
            let p = cert.problem().unwrap();
            let t = cert.simulate().unwrap();
            let ledger = check_telescoping(&t, &p, &[cert.w_star]).unwrap();
            assert!(ledger.holds, "{ledger:?}");
            let agg = &ledger.aggregate;
            assert!((agg.weighted_gap - agg.final_bound).abs() < 1e-9 * ledger.scale, "{agg:?}");
        }
    }

    #[test]
    fn chain_holds_on_affine_runs() {
        use crate::linalg::Matrix;
        use crate::operators::Operator;
        let m = Matrix::from_rows(&[vec![1.0, 2.0], vec![-2.0, 0.5]]).unwrap();
        let op = Operator::affine(m, Vector::from_vec(vec![0.3, -1.0])).unwrap();
        let p = ViProblem::unconstrained(op, 1.3, Vector::from_vec(vec![4.0, -2.0])).unwrap();
        let t = crate::rppa::run(&p, 6).unwrap();
        for w in [[0.0, 0.0], [4.0, -2.0], [10.0, 3.0], [-1.0, 7.5]] {
            let ledger = check_telescoping(&t, &p, &w).unwrap();
            assert!(ledger.holds, "{ledger:?}");
        }
        let probes = crate::rppa::probe_points(&t, p.set(), 3);
        let check = check_rate_bounds(&t, &p, &probes).unwrap();
        assert!(check.classic_holds() && check.optimal_holds());
    }
}
