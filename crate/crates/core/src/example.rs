//! One-dimensional worst-case instance for the relaxed proximal point method.
//!
//! `F` is the monotone ramp
//!
//! ```text
//! F(w) =  c        for w > δ
//!         (c/δ) w  for |w| ≤ δ
//!        -c        for w < -δ
//! ```
//!
//! started at `w₀ > δ` with `H = 1`. While iterates stay above `δ` every
//! resolvent step subtracts `c`, so `w̃_k = w₀ - c - kλc` and the ergodic
//! average is `w̄_N = w₀ - (λN+2)c/2`. At `w* = w₀ - (λN+2)c` the
//! performance ratio equals `1/(2(λN+2))`, matching the optimal upper bound.

use serde::Serialize;

use crate::bounds::{bound_optimal, validate_params, ParamError};
use crate::linalg::Vector;
use crate::operators::{Operator, OperatorError, ViProblem};
use crate::rppa::{self, Trajectory};
use crate::scalar::Real;

/// Default start and ramp half-width for demonstrations.
pub const DEFAULT_W0: f64 = 10.0;
pub const DEFAULT_DELTA: f64 = 1.0;
/// Default `c` as a fraction of its admissible upper limit.
pub const DEFAULT_C_FRACTION: f64 = 0.9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ExampleError {
    #[error(transparent)]
    Params(#[from] ParamError),
    #[error("c = {c} outside the admissible range (0, {upper})")]
    COutOfRange { c: f64, upper: f64 },
    #[error("need w0 > delta > 0, got w0 = {w0}, delta = {delta}")]
    Geometry { w0: f64, delta: f64 },
    #[error(transparent)]
    Operator(#[from] OperatorError),
}

#[derive(Debug, Clone, Serialize)]
pub struct WorstCaseCertificate<T = f64> {
    pub iterations: usize,
    pub relaxation: T,
    pub w0: T,
    pub delta: T,
    pub c: T,
    /// Closed-form `w̃_0, …, w̃_N`.
    pub trajectory: Vec<T>,
    pub w_bar: T,
    pub w_star: T,
    pub achieved_ratio: T,
}

/// Exclusive upper limit `(w₀ - δ)/(λN+2)` on `c`.
pub fn c_upper<T: Real>(iterations: usize, relaxation: T, w0: T, delta: T) -> T {
    (w0 - delta) / (relaxation * T::of_usize(iterations) + T::lit(2.0))
}

impl<T: Real> WorstCaseCertificate<T> {
    pub fn build(iterations: usize, relaxation: T, w0: T, delta: T, c: T) -> Result<Self, ExampleError> {
        validate_params(iterations, relaxation)?;
        if !(delta > T::zero() && w0 > delta && w0.is_finite()) {
            return Err(ExampleError::Geometry {
                w0: w0.to_f64_lossy(),
                delta: delta.to_f64_lossy(),
            });
        }
        let upper = c_upper(iterations, relaxation, w0, delta);
        if !(c > T::zero() && c < upper) {
            return Err(ExampleError::COutOfRange {
                c: c.to_f64_lossy(),
                upper: upper.to_f64_lossy(),
            });
        }
        let span = relaxation * T::of_usize(iterations) + T::lit(2.0);
        let trajectory = (0..=iterations)
            .map(|k| w0 - c - T::of_usize(k) * relaxation * c)
            .collect();
        let w_bar = w0 - span * c / T::lit(2.0);
        let w_star = w0 - span * c;
        let mut cert = Self {
            iterations,
            relaxation,
            w0,
            delta,
            c,
            trajectory,
            w_bar,
            w_star,
            achieved_ratio: T::zero(),
        };
        cert.achieved_ratio = cert.ratio_at(w_star)?.expect("w* differs from w0 since c > 0");
        Ok(cert)
    }

    /// `w₀ = 10`, `δ = 1`, `c = 0.9 (w₀-δ)/(λN+2)`.
    pub fn default_for(iterations: usize, relaxation: T) -> Result<Self, ExampleError> {
        validate_params(iterations, relaxation)?;
        let w0 = T::lit(DEFAULT_W0);
        let delta = T::lit(DEFAULT_DELTA);
        let c = T::lit(DEFAULT_C_FRACTION) * c_upper(iterations, relaxation, w0, delta);
        Self::build(iterations, relaxation, w0, delta, c)
    }

    pub fn operator(&self) -> Result<Operator<T>, OperatorError> {
        Operator::piecewise(self.c, self.delta)
    }

    /// The instance on the whole line with `H = 1`, started at `w₀`.
    pub fn problem(&self) -> Result<ViProblem<T>, ExampleError> {
        Ok(ViProblem::unconstrained(
            self.operator()?,
            self.relaxation,
            Vector::from_vec(vec![self.w0]),
        )?)
    }

    pub fn simulate(&self) -> Result<Trajectory<T>, ExampleError> {
        Ok(rppa::run(&self.problem()?, self.iterations)?)
    }

    /// Largest `|w̃_k - closed form|` over a simulated run.
    pub fn trajectory_deviation(&self) -> Result<T, ExampleError> {
        let t = self.simulate()?;
        Ok(t.w_tilde
            .iter()
            .zip(&self.trajectory)
            .map(|(sim, &exact)| (sim[0] - exact).abs())
            .fold(T::zero(), T::max))
    }

    /// `(w̄_N - w) F(w) / (w - w₀)²`; `None` at `w = w₀`.
    pub fn ratio_at(&self, w: T) -> Result<Option<T>, OperatorError> {
        let d = w - self.w0;
        if d == T::zero() {
            return Ok(None);
        }
        let f = self.operator()?.evaluate(&[w])?[0];
        Ok(Some((self.w_bar - w) * f / (d * d)))
    }

    /// Default grid spacing `1e-4 w₀`.
    pub fn default_step(&self) -> T {
        T::lit(1e-4) * self.w0
    }

    /// Grid maximisation of the ratio over the three regions of the line:
    /// `(δ, w₀)` from `w₀ - 3(λN+2)c`, `[-δ, δ]`, and `[-3w₀, -δ)`.
    pub fn case_scan(&self, step: T) -> Result<CaseScan<T>, OperatorError> {
        if !(step > T::zero()) {
            return Err(OperatorError::InvalidParameter(format!("grid step {step} must be positive")));
        }
        let span = self.relaxation * T::of_usize(self.iterations) + T::lit(2.0);
        let above_lo = (self.w0 - T::lit(3.0) * span * self.c).max(self.delta);
        let above = self.scan(above_lo, self.w0, step, false, false)?;
        let middle = self.scan(-self.delta, self.delta, step, true, true)?;
        let below = self.scan(-T::lit(3.0) * self.w0, -self.delta, step, true, false)?;

        // w₀ - w - (λN+2)c/2 > (λN+2)c/2 on the middle region.
        let half = span * self.c / T::lit(2.0);
        let chain_slack = grid(-self.delta, self.delta, step, true, true)
            .map(|w| (self.w0 - w - half) - half)
            .fold(T::infinity(), T::min);
        Ok(CaseScan {
            bound: bound_optimal(self.iterations, self.relaxation).expect("validated at build"),
            above,
            middle,
            below,
            middle_chain_min_slack: chain_slack,
        })
    }

    fn scan(&self, lo: T, hi: T, step: T, closed_lo: bool, closed_hi: bool) -> Result<CaseMax<T>, OperatorError> {
        let mut best = CaseMax {
            max_ratio: T::neg_infinity(),
            argmax: T::nan(),
            points: 0,
        };
        for w in grid(lo, hi, step, closed_lo, closed_hi) {
            if let Some(r) = self.ratio_at(w)? {
                best.points += 1;
                if r > best.max_ratio {
                    best.max_ratio = r;
                    best.argmax = w;
                }
            }
        }
        Ok(best)
    }
}

/// Points `lo + k·step` within the interval, endpoints included on request.
fn grid<T: Real>(lo: T, hi: T, step: T, closed_lo: bool, closed_hi: bool) -> impl Iterator<Item = T> {
    let count = ((hi - lo) / step).floor().to_usize().unwrap_or(0);
    let interior = (0..=count)
        .map(move |k| lo + T::of_usize(k) * step)
        .filter(move |&w| (closed_lo || w > lo) && w < hi);
    interior.chain((closed_hi).then_some(hi))
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct CaseMax<T = f64> {
    pub max_ratio: T,
    pub argmax: T,
    pub points: usize,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct CaseScan<T = f64> {
    /// `1/(2(λN+2))`
    pub bound: T,
    /// `w > δ`
    pub above: CaseMax<T>,
    /// `|w| ≤ δ`
    pub middle: CaseMax<T>,
    /// `w < -δ`
    pub below: CaseMax<T>,
    /// Smallest `(w₀ - w - (λN+2)c/2) - (λN+2)c/2` over the middle grid.
    pub middle_chain_min_slack: T,
}

impl<T: Real> CaseScan<T> {
    /// Region maxima consistent with the analysis: the upper region reaches the
    /// bound within `tol`, the middle stays below it, the lower is negative,
    /// and the middle chain is strict.
    pub fn consistent(&self, tol: T) -> bool {
        (self.above.max_ratio - self.bound).abs() <= tol
            && self.middle.max_ratio <= self.bound + tol
            && self.below.max_ratio < T::zero()
            && self.middle_chain_min_slack > T::zero()
    }
}
