#![allow(dead_code)]

use ppa_rate::linalg::{Matrix, SymMatrix, Vector};
use ppa_rate::operators::{ConstraintSet, Operator, ViProblem};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub mod oracles;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_sym(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> SymMatrix {
    SymMatrix::from_fn(n, |_, _| rng.gen_range(-scale..scale))
}

/// `BᵀB + shift·I`
pub fn random_spd(rng: &mut ChaCha8Rng, n: usize, shift: f64) -> SymMatrix {
    let b = Matrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
    SymMatrix::from_fn(n, |i, j| {
        (0..n).map(|r| b[(r, i)] * b[(r, j)]).sum::<f64>() + if i == j { shift } else { 0.0 }
    })
}

pub fn random_vector(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Vector {
    Vector::from_vec((0..n).map(|_| rng.gen_range(-scale..scale)).collect())
}

/// PSD symmetric part plus a skew part.
pub fn random_monotone_matrix(rng: &mut ChaCha8Rng, n: usize) -> Matrix {
    let s = random_spd(rng, n, 0.0);
    let k = Matrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
    let w = rng.gen_range(0.0..1.0);
    Matrix::from_fn(n, n, |i, j| w * s.get(i, j) + k[(i, j)] - k[(j, i)])
}

pub fn random_affine_problem(rng: &mut ChaCha8Rng, max_dim: usize) -> ViProblem {
    let d = rng.gen_range(1..=max_dim);
    let op = Operator::affine(random_monotone_matrix(rng, d), random_vector(rng, d, 2.0)).unwrap();
    let h = random_spd(rng, d, 0.5);
    let lambda = rng.gen_range(0.05..1.95);
    ViProblem::new(op, ConstraintSet::whole_space(d), h, lambda, random_vector(rng, d, 5.0)).unwrap()
}

pub fn random_piecewise_problem(rng: &mut ChaCha8Rng) -> ViProblem {
    let op = Operator::piecewise_centered(
        rng.gen_range(0.1..3.0),
        rng.gen_range(0.1..2.0),
        rng.gen_range(-2.0..2.0),
    )
    .unwrap();
    let start = rng.gen_range(-8.0..8.0);
    let set = if rng.gen_bool(0.3) {
        ConstraintSet::boxed(
            Vector::from_vec(vec![start - rng.gen_range(0.5..6.0)]),
            Vector::from_vec(vec![start + rng.gen_range(0.5..6.0)]),
        )
        .unwrap()
    } else {
        ConstraintSet::whole_space(1)
    };
    let h = SymMatrix::from_diag(&[rng.gen_range(0.3..3.0)]);
    ViProblem::new(op, set, h, rng.gen_range(0.05..1.95), Vector::from_vec(vec![start])).unwrap()
}

pub fn random_problem(rng: &mut ChaCha8Rng) -> ViProblem {
    if rng.gen_bool(0.5) {
        random_affine_problem(rng, 4)
    } else {
        random_piecewise_problem(rng)
    }
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
