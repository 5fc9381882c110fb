//! Reference computations written directly from definitions, sharing no
//! numerical code with the library beyond its data containers.

use ppa_rate::linalg::SymMatrix;
use ppa_rate::operators::ViProblem;
use ppa_rate::rppa::Trajectory;

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn mat_vec(m: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    m.iter().map(|row| dot(row, x)).collect()
}

pub fn h_apply(p: &ViProblem, x: &[f64]) -> Vec<f64> {
    let h = p.metric();
    (0..x.len()).map(|i| (0..x.len()).map(|j| h.get(i, j) * x[j]).sum()).collect()
}

/// `tr(G A)` summed entry by entry.
pub fn trace_product(g: &SymMatrix, a: &SymMatrix) -> f64 {
    let n = g.order();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            s += g.get(i, j) * a.get(j, i);
        }
    }
    s
}

/// Gaussian elimination with partial pivoting.
pub fn gauss_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            for c in col..n {
                a[r][c] -= f * a[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    x
}

/// Relaxed proximal iterates for `F(w) = Mw + q` on the whole space:
/// `(H + M) w̃ = H w - q`, then `w ← w + λ(w̃ - w)`.
pub fn affine_run(
    m: &[Vec<f64>],
    q: &[f64],
    h: &[Vec<f64>],
    lam: f64,
    w0: &[f64],
    n: usize,
) -> Vec<Vec<f64>> {
    let d = q.len();
    let lhs: Vec<Vec<f64>> = (0..d).map(|i| (0..d).map(|j| h[i][j] + m[i][j]).collect()).collect();
    let mut w = w0.to_vec();
    let mut out = Vec::new();
    for _ in 0..=n {
        let rhs = sub(&mat_vec(h, &w), q);
        let wt = gauss_solve(lhs.clone(), rhs);
        w = w.iter().zip(&wt).map(|(a, b)| a + lam * (b - a)).collect();
        out.push(wt);
    }
    out
}

pub fn mean(points: &[Vec<f64>]) -> Vec<f64> {
    let d = points[0].len();
    (0..d).map(|c| points.iter().map(|x| x[c]).sum::<f64>() / points.len() as f64).collect()
}

pub struct Interpolation {
    pub pairs: Vec<((usize, usize), f64)>,
    pub points: Vec<f64>,
    pub norm: f64,
    pub objective: f64,
}

/// Interpolation quantities evaluated straight from the iterates; the proximal
/// step assigns the operator value `H(w_k - w̃_k)` to `w̃_k`.
pub fn interpolation(t: &Trajectory, p: &ViProblem, w: &[f64]) -> Interpolation {
    let n = t.iterations;
    let fw = p.evaluate(w).unwrap();
    let g: Vec<Vec<f64>> = (0..=n).map(|k| h_apply(p, &sub(&t.w[k], &t.w_tilde[k]))).collect();
    let mut pairs = Vec::new();
    for i in 0..=n {
        for j in (i + 1)..=n {
            pairs.push(((i, j), dot(&sub(&t.w_tilde[j], &t.w_tilde[i]), &sub(&g[j], &g[i]))));
        }
    }
    let points = (0..=n).map(|i| dot(&sub(&t.w_tilde[i], w), &sub(&g[i], &fw))).collect();
    let d = sub(w, t.start());
    let tilde: Vec<Vec<f64>> = t.w_tilde.iter().map(|x| x.to_vec()).collect();
    Interpolation {
        pairs,
        points,
        norm: dot(&d, &h_apply(p, &d)),
        objective: dot(&sub(w, &mean(&tilde)), &fw),
    }
}

pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + b.abs())
}
