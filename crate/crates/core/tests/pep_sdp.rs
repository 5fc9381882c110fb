mod common;

use common::oracles::{self, interpolation, trace_product};
use common::{random_problem, random_sym, rng};
use ppa_rate::bounds::{bound_classic, bound_optimal};
use ppa_rate::linalg::{sym_eig, SymMatrix, Vector};
use ppa_rate::pep::{assemble, build_a_ij, build_a_iw, build_a_w, build_c, embed, solve_pep, ConstraintLabel};
use ppa_rate::rppa::{self, probe_points};
use ppa_rate::sdp::{self, triplet, Constraint, SdpConfig, SdpProblem, SdpStatus, Sense};
use rand::Rng;

fn close(a: f64, b: f64) -> bool {
    oracles::close(a, b, 1e-9)
}

#[test]
fn trace_identities_match_direct_evaluation() {
    let mut r = rng(11);
    for case in 0..100 {
        let p = random_problem(&mut r);
        let n = r.gen_range(1..=8);
        let lam = p.relaxation();
        let t = rppa::run(&p, n).unwrap();
        for w in probe_points(&t, p.set(), case).iter().take(5) {
            let g = embed(&t, &p, w).unwrap();
            let direct = interpolation(&t, &p, w);
            for ((i, j), v) in &direct.pairs {
                let a = build_a_ij(*i, *j, lam, n).unwrap();
                assert!(close(trace_product(&g, &a), *v), "case {case}: A_{i}_{j}");
            }
            for (i, v) in direct.points.iter().enumerate() {
                let a = build_a_iw(i, lam, n).unwrap();
                assert!(close(trace_product(&g, &a), *v), "case {case}: A_{i}_w");
            }
            assert!(close(trace_product(&g, &build_a_w(n)), direct.norm));
            assert!(close(trace_product(&g, &build_c(n)), direct.objective));
        }
    }
}

#[test]
fn trace_oracle_detects_shifted_pairing() {
    // An off-by-one in the pair builder must not go unnoticed.
    let mut r = rng(5);
    let mut detected = 0;
    for _ in 0..20 {
        let p = common::random_affine_problem(&mut r, 3);
        let t = rppa::run(&p, 4).unwrap();
        let w = probe_points(&t, p.set(), 1)[3].clone();
        let g = embed(&t, &p, &w).unwrap();
        let direct = interpolation(&t, &p, &w);
        let ((i, j), v) = direct.pairs[0];
        let wrong = build_a_ij(i, j + 1, p.relaxation(), 4).unwrap();
        if !close(trace_product(&g, &wrong), v) {
            detected += 1;
        }
    }
    assert_eq!(detected, 20);
}

#[test]
fn constraint_matrices_are_symmetric() {
    for n in [1, 4, 9] {
        let inst = assemble(n, 1.3).unwrap();
        let mut all = vec![inst.objective.clone(), inst.normalization.clone()];
        all.extend(inst.inequalities.iter().map(|(m, _)| m.clone()));
        for m in all {
            let d = m.to_dense();
            assert_eq!(d, d.transpose());
        }
        assert_eq!(inst.pair_count(), n * (n + 1) / 2);
        assert_eq!(inst.point_count(), n + 1);
        assert!(matches!(inst.inequalities.last().unwrap().1, ConstraintLabel::Point { i } if i == n));
    }
}

#[test]
fn pep_values_for_small_horizons() {
    let cfg = SdpConfig::default();
    for (n, lam, expected) in [(1, 1.5_f64, 1.0 / 7.0), (10, 1.5, 1.0 / 34.0), (1, 1.0, 1.0 / 6.0)] {
        let sol = solve_pep(&assemble(n, lam).unwrap(), &cfg).unwrap();
        assert!((sol.eps - expected).abs() <= 1e-4, "N = {n}, λ = {lam}: {}", sol.eps);
        let g_norm = sol.g.frobenius_norm();
        assert!(sol.stats.min_eigenvalue >= -1e-7 * (1.0 + g_norm));
        assert!(sol.stats.max_violation <= 1e-7);
    }
}

#[test]
fn pep_value_is_nonincreasing_in_horizon() {
    let cfg = SdpConfig::default();
    let eps: Vec<f64> = (1..=8)
        .map(|n| solve_pep(&assemble(n, 1.5).unwrap(), &cfg).unwrap().eps)
        .collect();
    for w in eps.windows(2) {
        assert!(w[1] <= w[0] + 1e-7, "{eps:?}");
    }
}

#[test]
fn embedded_runs_never_beat_the_solved_optimum() {
    let cfg = SdpConfig::default();
    let mut r = rng(23);
    for n in 1..=3 {
        for lam in [0.5, 1.5] {
            let inst = assemble(n, lam).unwrap();
            let eps = solve_pep(&inst, &cfg).unwrap().eps;
            for _ in 0..15 {
                let p = random_problem(&mut r).with_relaxation(lam).unwrap();
                let t = rppa::run(&p, n).unwrap();
                for w in probe_points(&t, p.set(), 9).iter().take(10) {
                    let g = embed(&t, &p, w).unwrap();
                    let d2 = trace_product(&g, &inst.normalization);
                    if d2 < 1e-10 {
                        continue;
                    }
                    let g = g.scaled(1.0 / d2);
                    for (a, label) in &inst.inequalities {
                        assert!(trace_product(&g, a) >= -1e-9, "{label}");
                    }
                    assert!(sym_eig(&g).unwrap().min_value() >= -1e-9);
                    assert!(-trace_product(&g, &inst.objective) <= eps + 1e-6);
                }
            }
        }
    }
}

#[test]
fn sandwich_on_a_parameter_grid() {
    let cfg = SdpConfig::default();
    for lam in [0.5, 1.9] {
        for n in [1, 4] {
            let eps = solve_pep(&assemble(n, lam).unwrap(), &cfg).unwrap().eps;
            assert!(eps >= bound_optimal(n, lam).unwrap() - 1e-4);
            assert!(eps <= bound_classic(n, lam).unwrap() + 1e-4);
        }
    }
}

fn min_eig_problem(c: &SymMatrix) -> SdpProblem {
    let n = c.order();
    SdpProblem::new(c.clone(), vec![Constraint::new(SymMatrix::identity(n), Sense::Eq, 1.0)]).unwrap()
}

#[test]
fn solver_respects_weak_duality_and_feasibility() {
    let mut r = rng(3);
    let cfg = SdpConfig::default();
    for order in 2..=20 {
        let c = random_sym(&mut r, order, 1.0);
        let res = sdp::solve(&min_eig_problem(&c), &cfg).unwrap();
        assert_eq!(res.status, SdpStatus::Optimal);
        let exact = sym_eig(&c).unwrap().min_value();
        assert!(res.objective_value >= exact - 1e-6);
        assert!((res.objective_value - exact).abs() <= 1e-6);
        let g_norm = res.g.frobenius_norm();
        assert!(sym_eig(&res.g).unwrap().min_value() >= -1e-7 * (1.0 + g_norm));
        assert!((res.g.trace() - 1.0).abs() <= 1e-7 * 2.0);
    }
}

#[test]
fn solver_is_deterministic() {
    let inst = assemble(4, 1.2).unwrap();
    let cfg = SdpConfig::default();
    let a = sdp::solve::<f64>(&inst.to_sdp(), &cfg).unwrap();
    let b = sdp::solve::<f64>(&inst.to_sdp(), &cfg).unwrap();
    assert_eq!(a.iterations, b.iterations);
    assert_eq!(a.objective_value.to_bits(), b.objective_value.to_bits());
    assert_eq!(a.g, b.g);
}

#[test]
fn iteration_cap_reports_failure() {
    let inst = assemble(6, 1.5).unwrap();
    let cfg = SdpConfig { max_iter: 10, ..SdpConfig::default() };
    assert!(matches!(
        sdp::solve(&inst.to_sdp(), &cfg),
        Err(sdp::SdpError::SolverFailed { iterations: 10, .. })
    ));
}

#[test]
fn triplet_export_round_trips_and_solves_identically() {
    let inst = assemble(3, 1.5).unwrap();
    let mut buf = Vec::new();
    inst.export(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("sdp-triplet 1\n"));
    assert!(text.contains("meta N 3"));
    let (problem, meta) = triplet::from_str::<f64>(&text).unwrap();
    assert_eq!(problem, inst.to_sdp());
    assert!(meta.iter().any(|(k, v)| k == "lambda" && v.parse::<f64>().unwrap() == 1.5));
    let cfg = SdpConfig::default();
    let a = sdp::solve(&problem, &cfg).unwrap();
    let b = solve_pep(&inst, &cfg).unwrap();
    assert_eq!((-a.objective_value).to_bits(), b.eps.to_bits());
}

#[test]
fn f32_instance_assembles_consistently() {
    let a = assemble::<f32>(3, 1.5).unwrap();
    let b = assemble::<f64>(3, 1.5).unwrap();
    for ((x, _), (y, _)) in a.inequalities.iter().zip(&b.inequalities) {
        assert!(x.cast::<f64>().sub(y).max_abs() < 1e-6);
    }
    let _ = Vector::<f32>::zeros(1);
}
