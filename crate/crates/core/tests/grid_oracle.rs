//! Brute-force search over the one-dimensional worst-case family, written
//! without the library's resolvent or iteration code.

use ppa_rate::bounds::bound_optimal;
use ppa_rate::example::WorstCaseCertificate;
use ppa_rate::pep::{assemble, solve_pep};
use ppa_rate::sdp::SdpConfig;

fn ramp(c: f64, delta: f64, w: f64) -> f64 {
    c * (w / delta).clamp(-1.0, 1.0)
}

/// Solves `x + F(x) = v` by bisection; the left side is strictly increasing.
fn resolvent(c: f64, delta: f64, v: f64) -> f64 {
    let (mut lo, mut hi) = (v - c - 1.0, v + c + 1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid + ramp(c, delta, mid) < v {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Averaged proximal iterate after `n` relaxed steps from `w0`.
fn averaged(c: f64, delta: f64, lam: f64, n: usize, w0: f64) -> f64 {
    let mut w = w0;
    let mut sum = 0.0;
    for _ in 0..=n {
        let wt = resolvent(c, delta, w);
        sum += wt;
        w += lam * (wt - w);
    }
    sum / (n + 1) as f64
}

fn best_ratio(c: f64, delta: f64, lam: f64, n: usize, w0: f64, lo: f64, hi: f64, points: usize) -> (f64, f64) {
    let wb = averaged(c, delta, lam, n, w0);
    let mut best = (f64::NEG_INFINITY, f64::NAN);
    for i in 0..=points {
        let w = lo + (hi - lo) * i as f64 / points as f64;
        if w == w0 {
            continue;
        }
        let r = (wb - w) * ramp(c, delta, w) / ((w - w0) * (w - w0));
        if r > best.0 {
            best = (r, w);
        }
    }
    best
}

/// Maximum of the ratio over a grid of admissible `c` and of `w`.
fn family_max(lam: f64, n: usize) -> f64 {
    let (w0, delta) = (10.0, 1.0);
    let upper = (w0 - delta) / (lam * n as f64 + 2.0);
    (1..20)
        .map(|k| {
            let c = upper * k as f64 / 20.0;
            best_ratio(c, delta, lam, n, w0, -3.0 * w0, w0, 40_000).0
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

#[test]
fn grid_search_reaches_the_optimal_rate() {
    for lam in [0.5, 1.0, 1.5, 1.9] {
        for n in [1, 2, 5, 10] {
            let found = family_max(lam, n);
            let target = 1.0 / (2.0 * (lam * n as f64 + 2.0));
            assert!(found <= target + 1e-12, "λ = {lam}, N = {n}: {found} > {target}");
            assert!(target - found <= 1e-4, "λ = {lam}, N = {n}: {found} vs {target}");
            assert!((bound_optimal(n, lam).unwrap() - target).abs() < 1e-15);
        }
    }
}

#[test]
fn grid_search_agrees_with_the_solved_program() {
    let cfg = SdpConfig::default();
    for (lam, n) in [(1.0, 1), (1.5, 3), (0.5, 6)] {
        let eps = solve_pep(&assemble(n, lam).unwrap(), &cfg).unwrap().eps;
        assert!((family_max(lam, n) - eps).abs() <= 1e-4);
    }
}

#[test]
fn oracle_simulation_matches_the_certificate() {
    let cert = WorstCaseCertificate::build(7, 1.3, 10.0, 1.0, 0.5).unwrap();
    let wb = averaged(0.5, 1.0, 1.3, 7, 10.0);
    assert!((wb - cert.w_bar).abs() < 1e-12);
}

#[test]
fn worked_case_scan() {
    // λN + 2 = 5 with c = 1 puts the maximiser at w₀ - 5c = 5.
    let (r, w) = best_ratio(1.0, 1.0, 1.5, 2, 10.0, 1.0, 10.0, 90_000);
    assert!((r - 0.1).abs() < 1e-9);
    assert!((w - 5.0).abs() < 1e-3);

    let cert = WorstCaseCertificate::build(2, 1.5_f64, 10.0, 1.0, 1.0).unwrap();
    let scan = cert.case_scan(cert.default_step()).unwrap();
    assert!((scan.above.max_ratio - 0.1).abs() < 1e-9);
    assert!((scan.above.argmax - 5.0).abs() < 1e-3);
    assert!(scan.middle.max_ratio < 0.1);
    assert!(scan.below.max_ratio < 0.0);
    assert!(scan.consistent(1e-9));
}
