//! Self-check suite behind `ppa-rate verify`: every numeric invariant of the
//! library, evaluated on seeded random instances.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bounds::{
    bound_classic, bound_optimal, check_proof_inequality, check_rate_bounds, check_telescoping,
    min_proof_slack,
};
use crate::example::{c_upper, WorstCaseCertificate};
use crate::linalg::{sym_eig, Matrix, SymMatrix, Vector};
use crate::operators::{ConstraintSet, Operator, ViProblem};
use crate::pep::{assemble, build_a_ij, build_a_iw, build_a_w, build_c, embed, solve_pep};
use crate::rppa::{self, performance_ratio, probe_points, scale_problem, translate_problem, Trajectory};
use crate::sdp::{self, Constraint, SdpConfig, SdpProblem, Sense};

#[derive(Debug, Clone, Serialize)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub cases: usize,
    /// Largest observed error or smallest observed slack, per check.
    pub worst: f64,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub seed: u64,
    pub checks: Vec<CheckOutcome>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> Vec<&CheckOutcome> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }
}

/// Random monotone instance: affine in dimension 1-4 with a random metric,
/// or the one-dimensional ramp, optionally on an interval.
pub fn random_problem(rng: &mut ChaCha8Rng, max_dim: usize) -> ViProblem {
    let lambda = rng.gen_range(0.05..1.95);
    if rng.gen_bool(0.5) {
        let c = rng.gen_range(0.1..3.0);
        let delta = rng.gen_range(0.1..2.0);
        let center = rng.gen_range(-2.0..2.0);
        let op = Operator::piecewise_centered(c, delta, center).expect("valid ramp");
        let start = Vector::from_vec(vec![rng.gen_range(-8.0..8.0)]);
        let set = if rng.gen_bool(0.3) {
            let lo = start[0] - rng.gen_range(0.5..6.0);
            let hi = start[0] + rng.gen_range(0.5..6.0);
            ConstraintSet::boxed(Vector::from_vec(vec![lo]), Vector::from_vec(vec![hi])).expect("ordered bounds")
        } else {
            ConstraintSet::whole_space(1)
        };
        let h = SymMatrix::from_diag(&[rng.gen_range(0.3..3.0)]);
        return ViProblem::new(op, set, h, lambda, start).expect("valid instance");
    }
    let d = rng.gen_range(1..=max_dim.max(1));
    let b = Matrix::from_fn(d, d, |_, _| rng.gen_range(-1.0..1.0));
    let k = Matrix::from_fn(d, d, |_, _| rng.gen_range(-2.0..2.0));
    let psd_weight = rng.gen_range(0.0..1.0);
    let m = Matrix::from_fn(d, d, |i, j| {
        let sym: f64 = (0..d).map(|r| b[(r, i)] * b[(r, j)]).sum();
        psd_weight * sym + 0.5 * (k[(i, j)] - k[(j, i)])
    });
    let q = Vector::from_vec((0..d).map(|_| rng.gen_range(-2.0..2.0)).collect());
    let op = Operator::affine(m, q).expect("monotone by construction");
    let a = Matrix::from_fn(d, d, |_, _| rng.gen_range(-1.0..1.0));
    let h = SymMatrix::from_fn(d, |i, j| {
        let s: f64 = (0..d).map(|r| a[(r, i)] * a[(r, j)]).sum();
        s + if i == j { 0.5 } else { 0.0 }
    });
    let start = Vector::from_vec((0..d).map(|_| rng.gen_range(-5.0..5.0)).collect());
    ViProblem::new(op, ConstraintSet::whole_space(d), h, lambda, start).expect("valid instance")
}

fn outcome(name: &'static str, cases: usize, worst: f64, passed: bool, detail: impl Into<String>) -> CheckOutcome {
    CheckOutcome {
        name,
        passed,
        cases,
        worst,
        detail: detail.into(),
    }
}

fn failed(name: &'static str, err: impl std::fmt::Display) -> CheckOutcome {
    outcome(name, 0, f64::NAN, false, format!("error: {err}"))
}

macro_rules! tryc {
    ($name:expr, $e:expr) => {
        match $e {
            Ok(v) => v,
            Err(err) => return failed($name, err),
        }
    };
}

/// Scalar inequality on a 200×200 grid of `[0, 3]²` with `A + B ≥ 1`.
pub fn check_proof_grid() -> CheckOutcome {
    const NAME: &str = "proof-inequality";
    let samples: Vec<(f64, f64)> = (0..200)
        .flat_map(|i| (0..200).map(move |j| (3.0 * i as f64 / 199.0, 3.0 * j as f64 / 199.0)))
        .filter(|&(a, b)| a + b >= 1.0)
        .collect();
    let mut worst = f64::INFINITY;
    let mut ok = true;
    let mut cases = 0;
    for lam in [0.1, 0.5, 1.0, 1.5, 1.9] {
        for n in 1..=20 {
            ok &= tryc!(NAME, check_proof_inequality(lam, n, &samples));
            worst = worst.min(tryc!(NAME, min_proof_slack(lam, n, &samples)));
            cases += 1;
        }
    }
    outcome(NAME, cases, worst, ok, format!("{} grid points per (λ, N)", samples.len()))
}

/// `bound_optimal ≤ bound_classic` and their ratio tends to one.
pub fn check_bound_ordering() -> CheckOutcome {
    const NAME: &str = "bound-ordering";
    let mut worst = f64::INFINITY;
    let mut cases = 0;
    for lam in [0.1, 0.5, 1.0, 1.5, 1.9] {
        for n in 1..=50 {
            let gap = tryc!(NAME, bound_classic(n, lam)) - tryc!(NAME, bound_optimal(n, lam));
            worst = worst.min(gap);
            cases += 1;
        }
    }
    let asymptotic: f64 = tryc!(NAME, bound_classic(10_000, 1.5)) / tryc!(NAME, bound_optimal(10_000, 1.5));
    outcome(
        NAME,
        cases,
        worst,
        worst >= 0.0 && (asymptotic - 1.0).abs() <= 1e-3,
        format!("classic/optimal at N = 10^4: {asymptotic:.6}"),
    )
}

/// Worst-case instances: closed form, simulated run, achieved ratio, case scan.
pub fn check_certificates(rng: &mut ChaCha8Rng) -> CheckOutcome {
    const NAME: &str = "certificate";
    let mut worst: f64 = 0.0;
    let mut ok = true;
    let cases = 50;
    for k in 0..cases {
        let n = rng.gen_range(1..=30);
        let lam: f64 = rng.gen_range(0.05..1.95);
        let w0 = rng.gen_range(1.0..20.0);
        let delta = rng.gen_range(0.05..0.9) * w0;
        let c = rng.gen_range(0.01..0.99) * c_upper(n, lam, w0, delta);
        let cert = tryc!(NAME, WorstCaseCertificate::build(n, lam, w0, delta, c));
        let bound = tryc!(NAME, bound_optimal(n, lam));
        let ratio_err = (cert.achieved_ratio - bound).abs();
        let traj_err = tryc!(NAME, cert.trajectory_deviation());
        worst = worst.max(ratio_err).max(traj_err);
        ok &= ratio_err <= 1e-12 && traj_err <= 1e-12;
        ok &= cert.trajectory.iter().all(|&x| x > delta) && cert.w_star > delta;
        if k % 10 == 0 {
            let scan = tryc!(NAME, cert.case_scan(cert.default_step()));
            ok &= scan.consistent(1e-4);
        }
    }
    outcome(NAME, cases, worst, ok, "ratio and trajectory errors ≤ 1e-12")
}

/// `tr(G A)` against direct inner products of the recorded run.
pub fn trace_identity_error(t: &Trajectory, p: &ViProblem, w: &[f64]) -> Result<f64, String> {
    let g = embed(t, p, w).map_err(|e| e.to_string())?;
    let n = t.iterations;
    let lam = t.relaxation;
    let h = p.metric();
    let start = t.start();
    let fw = p.evaluate(w).map_err(|e| e.to_string())?;
    let wv = Vector::from_slice(w);
    let resid = |k: usize| h.mul_vec(&(&t.w[k] - &t.w_tilde[k]));
    let rel = |a: f64, b: f64| (a - b).abs() / (1.0 + b.abs());
    let mut worst: f64 = 0.0;
    for i in 0..=n {
        for j in (i + 1)..=n {
            let a = build_a_ij(i, j, lam, n).map_err(|e| e.to_string())?;
            let direct = (&t.w_tilde[j] - &t.w_tilde[i]).dot(&(&resid(j) - &resid(i)));
            worst = worst.max(rel(g.dot(&a), direct));
        }
        let a = build_a_iw(i, lam, n).map_err(|e| e.to_string())?;
        let direct = (&t.w_tilde[i] - &wv).dot(&(&resid(i) - &fw));
        worst = worst.max(rel(g.dot(&a), direct));
    }
    let d = &wv - start;
    worst = worst.max(rel(g.dot(&build_a_w(n)), h.bilinear(&d, &d)));
    worst = worst.max(rel(g.dot(&build_c(n)), (&wv - &t.average).dot(&fw)));
    Ok(worst)
}

pub fn check_trace_identities(rng: &mut ChaCha8Rng) -> CheckOutcome {
    const NAME: &str = "trace-identities";
    let mut worst: f64 = 0.0;
    let cases = 100;
    for k in 0..cases {
        let p = random_problem(rng, 4);
        let n = rng.gen_range(1..=8);
        let t = tryc!(NAME, rppa::run(&p, n));
        for w in probe_points(&t, p.set(), k as u64).iter().take(6) {
            worst = worst.max(tryc!(NAME, trace_identity_error(&t, &p, w)));
        }
    }
    outcome(NAME, cases, worst, worst <= 1e-9, "relative to 1 + |direct value|")
}

/// Embedded runs, normalised to `‖w - w₀‖_H = 1`, are feasible PEP points
/// and never exceed the optimal rate.
pub fn check_embedding_feasibility(rng: &mut ChaCha8Rng) -> CheckOutcome {
    const NAME: &str = "embedding-feasibility";
    let mut worst = f64::INFINITY;
    let mut cases = 0;
    for k in 0..40 {
        let p = random_problem(rng, 4);
        let n = rng.gen_range(1..=6);
        let t = tryc!(NAME, rppa::run(&p, n));
        let inst = tryc!(NAME, assemble(n, t.relaxation));
        let bound = tryc!(NAME, bound_optimal(n, t.relaxation));
        for w in probe_points(&t, p.set(), 100 + k).iter().take(8) {
            let g = tryc!(NAME, embed(&t, &p, w));
            let d2 = g.dot(&inst.normalization);
            if d2 <= 1e-12 {
                continue;
            }
            let g = g.scaled(1.0 / d2);
            let min_eig = tryc!(NAME, sym_eig(&g)).min_value();
            let min_ineq = inst
                .inequalities
                .iter()
                .map(|(a, _)| g.dot(a))
                .fold(f64::INFINITY, f64::min);
            let excess = -g.dot(&inst.objective) - bound;
            worst = worst.min(min_eig).min(min_ineq).min(-excess);
            cases += 1;
        }
    }
    outcome(NAME, cases, worst, worst >= -1e-9, "min of eigenvalue, inequality slack, rate slack")
}

/// Both rate bounds at every probe point of random runs.
pub fn check_rate_bounds_live(rng: &mut ChaCha8Rng) -> CheckOutcome {
    const NAME: &str = "rate-bounds";
    let mut worst = f64::NEG_INFINITY;
    let mut ok = true;
    let cases = 60;
    for k in 0..cases {
        let p = random_problem(rng, 4);
        let n = rng.gen_range(1..=12);
        let t = tryc!(NAME, rppa::run(&p, n));
        let probes = probe_points(&t, p.set(), 200 + k as u64);
        let check = tryc!(NAME, check_rate_bounds(&t, &p, &probes));
        worst = worst.max(check.max_excess_optimal);
        ok &= check.classic_holds() && check.optimal_holds();
    }
    outcome(NAME, cases, worst, ok, "largest excess over the optimal bound")
}

/// Every step of the optimal-rate argument on random runs, plus tightness
/// on the worst-case instance.
pub fn check_telescoping_chain(rng: &mut ChaCha8Rng) -> CheckOutcome {
    const NAME: &str = "telescoping";
    let mut worst = f64::INFINITY;
    let mut ok = true;
    let mut cases = 0;
    for k in 0..30 {
        let p = random_problem(rng, 4);
        let n = rng.gen_range(1..=10);
        let t = tryc!(NAME, rppa::run(&p, n));
        for w in probe_points(&t, p.set(), 300 + k).iter().take(10) {
            let ledger = tryc!(NAME, check_telescoping(&t, &p, w));
            worst = worst.min(ledger.worst_slack);
            ok &= ledger.holds;
            cases += 1;
        }
    }
    for (n, lam) in [(1, 1.5), (4, 0.5), (9, 1.9)] {
        let cert = tryc!(NAME, WorstCaseCertificate::<f64>::default_for(n, lam));
        let p = tryc!(NAME, cert.problem());
        let t = tryc!(NAME, cert.simulate());
        let ledger = tryc!(NAME, check_telescoping(&t, &p, &[cert.w_star]));
        let agg = &ledger.aggregate;
        ok &= ledger.holds && (agg.weighted_gap - agg.final_bound).abs() <= 1e-9 * ledger.scale;
        cases += 1;
    }
    outcome(NAME, cases, worst, ok, "smallest scaled slack in the chain")
}

fn rel_close(a: f64, b: f64, scale: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(scale)
}

/// Scaled and translated instances reproduce the mapped run and ratios.
pub fn check_metamorphic(rng: &mut ChaCha8Rng) -> CheckOutcome {
    const NAME: &str = "metamorphic";
    let mut worst: f64 = 0.0;
    let cases = 20;
    for k in 0..cases {
        let p = random_problem(rng, 3);
        let n = rng.gen_range(1..=8);
        let factor = 10f64.powf(rng.gen_range(-1.0..1.0));
        let shift: Vec<f64> = (0..p.dim()).map(|_| rng.gen_range(-5.0..5.0)).collect();
        let t = tryc!(NAME, rppa::run(&p, n));
        let ps = tryc!(NAME, scale_problem(&p, factor));
        let pt = tryc!(NAME, translate_problem(&p, &shift));
        let ts = tryc!(NAME, rppa::run(&ps, n));
        let tt = tryc!(NAME, rppa::run(&pt, n));
        let mag = t.w.iter().map(|x| x.norm_inf()).fold(1.0, f64::max);
        for (k, x) in t.w_tilde.iter().enumerate() {
            for (i, &xi) in x.iter().enumerate() {
                worst = worst.max(rel_close(ts.w_tilde[k][i] * factor, xi, mag));
                worst = worst.max(rel_close(tt.w_tilde[k][i] + shift[i], xi, mag));
            }
        }
        let scale = tryc!(NAME, bound_optimal(n, t.relaxation));
        for w in probe_points(&t, p.set(), 400 + k as u64).iter().take(10) {
            let Some(r) = tryc!(NAME, performance_ratio(&t, &p, w)) else {
                continue;
            };
            let ws = w.scaled(1.0 / factor);
            let wt: Vector = w.iter().zip(&shift).map(|(&a, &s)| a - s).collect();
            if let Some(rs) = tryc!(NAME, performance_ratio(&ts, &ps, &ws)) {
                worst = worst.max(rel_close(rs, r, scale));
            }
            if let Some(rt) = tryc!(NAME, performance_ratio(&tt, &pt, &wt)) {
                worst = worst.max(rel_close(rt, r, scale));
            }
        }
    }
    outcome(NAME, cases, worst, worst <= 1e-9, "relative deviation of iterates and ratios")
}

/// Minimum-eigenvalue SDPs of orders 2-20 against the eigensolver.
pub fn check_sdp_min_eigenvalue(rng: &mut ChaCha8Rng, cfg: &SdpConfig) -> CheckOutcome {
    const NAME: &str = "sdp-min-eigenvalue";
    let mut worst: f64 = 0.0;
    for order in 2..=20 {
        let c = SymMatrix::from_fn(order, |_, _| rng.gen_range(-1.0..1.0));
        let p = tryc!(
            NAME,
            SdpProblem::new(c.clone(), vec![Constraint::new(SymMatrix::identity(order), Sense::Eq, 1.0)])
        );
        let r = tryc!(NAME, sdp::solve(&p, cfg));
        let exact = tryc!(NAME, sym_eig(&c)).min_value();
        worst = worst.max((r.objective_value - exact).abs());
    }
    outcome(NAME, 19, worst, worst <= 1e-6, "absolute error of the optimal value")
}

/// Small PEP instances against the optimal rate and the classic bound.
pub fn check_pep_small(cfg: &SdpConfig) -> CheckOutcome {
    const NAME: &str = "pep-small";
    let mut worst: f64 = 0.0;
    let mut ok = true;
    let mut cases = 0;
    for lam in [0.5, 1.0, 1.5, 1.9] {
        for n in 1..=3 {
            let inst = tryc!(NAME, assemble(n, lam));
            let sol = tryc!(NAME, solve_pep(&inst, cfg));
            let opt = tryc!(NAME, bound_optimal(n, lam));
            let classic = tryc!(NAME, bound_classic(n, lam));
            worst = worst.max((sol.eps - opt).abs() / opt);
            ok &= sol.eps >= opt - 1e-4 && sol.eps <= classic + 1e-4;
            cases += 1;
        }
    }
    outcome(NAME, cases, worst, ok && worst <= 1e-4, "relative deviation from the optimal rate")
}

/// Runs every check with a fixed seed.
pub fn run_suite(seed: u64, cfg: &SdpConfig) -> SuiteReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let checks = vec![
        check_proof_grid(),
        check_bound_ordering(),
        check_certificates(&mut rng),
        check_trace_identities(&mut rng),
        check_embedding_feasibility(&mut rng),
        check_rate_bounds_live(&mut rng),
        check_telescoping_chain(&mut rng),
        check_metamorphic(&mut rng),
        check_sdp_min_eigenvalue(&mut rng, cfg),
        check_pep_small(cfg),
    ];
    SuiteReport { seed, checks }
}
