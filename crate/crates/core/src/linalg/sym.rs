use crate::linalg::{Matrix, Vector};
use crate::scalar::Real;

#[inline]
fn packed_index(i: usize, j: usize) -> usize {
    let (r, c) = if i >= j { (i, j) } else { (j, i) };
    r * (r + 1) / 2 + c
}

/// Dense symmetric matrix stored as its packed lower triangle, so that
/// `get(i, j) == get(j, i)` holds by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix<T = f64> {
    order: usize,
    data: Vec<T>,
}

impl<T: Real> SymMatrix<T> {
    /// Zero matrix of the given order. Panics on order 0.
    pub fn zeros(order: usize) -> Self {
        assert!(order >= 1, "symmetric matrix order must be at least 1");
        Self {
            order,
            data: vec![T::zero(); order * (order + 1) / 2],
        }
    }

    pub fn identity(order: usize) -> Self {
        let mut m = Self::zeros(order);
        for i in 0..order {
            m.set(i, i, T::one());
        }
        m
    }

    pub fn from_diag(diag: &[T]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m.set(i, i, d);
        }
        m
    }

    /// Evaluates `f(i, j)` on the lower triangle (`i >= j`).
    pub fn from_fn(order: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut m = Self::zeros(order);
        for i in 0..order {
            for j in 0..=i {
                m.data[packed_index(i, j)] = f(i, j);
            }
        }
        m
    }

    /// Builds from row slices, reading only the lower triangle.
    pub fn from_rows(rows: &[Vec<T>]) -> Self {
        Self::from_fn(rows.len(), |i, j| rows[i][j])
    }

    /// Symmetrized outer product `(u vᵀ + v uᵀ) / 2`.
    pub fn sym_outer(u: &[T], v: &[T]) -> Self {
        debug_assert_eq!(u.len(), v.len());
        let half = T::lit(0.5);
        Self::from_fn(u.len(), |i, j| half * (u[i] * v[j] + v[i] * u[j]))
    }

    pub fn order(&self) -> usize {
        self.order
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[packed_index(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: T) {
        self.data[packed_index(i, j)] = value;
    }

    /// Packed lower triangle in row order: (0,0), (1,0), (1,1), (2,0), ...
    pub fn packed(&self) -> &[T] {
        &self.data
    }

    pub fn from_packed(order: usize, data: Vec<T>) -> Self {
        assert_eq!(data.len(), order * (order + 1) / 2, "packed length");
        assert!(order >= 1);
        Self { order, data }
    }

    pub fn trace(&self) -> T {
        (0..self.order).map(|i| self.get(i, i)).sum()
    }

    /// `tr(A B)` for symmetric `A`, `B`, i.e. the Frobenius inner product.
    pub fn dot(&self, other: &Self) -> T {
        debug_assert_eq!(self.order, other.order);
        let mut diag = T::zero();
        let mut off = T::zero();
        for i in 0..self.order {
            let row = i * (i + 1) / 2;
            for j in 0..i {
                off += self.data[row + j] * other.data[row + j];
            }
            diag += self.data[row + i] * other.data[row + i];
        }
        diag + off + off
    }

    pub fn frobenius_norm(&self) -> T {
        self.dot(self).sqrt()
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, &x| m.max(x.abs()))
    }

    pub fn max_diag(&self) -> T {
        (0..self.order)
            .map(|i| self.get(i, i))
            .fold(T::neg_infinity(), T::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    pub fn mul_vec(&self, x: &[T]) -> Vector<T> {
        debug_assert_eq!(self.order, x.len());
        let mut out = Vector::zeros(self.order);
        for i in 0..self.order {
            let row = i * (i + 1) / 2;
            for j in 0..i {
                let a = self.data[row + j];
                out[i] += a * x[j];
                out[j] += a * x[i];
            }
            out[i] += self.data[row + i] * x[i];
        }
        out
    }

    /// `xᵀ M y`
    pub fn bilinear(&self, x: &[T], y: &[T]) -> T {
        self.mul_vec(y).iter().zip(x).map(|(&a, &b)| a * b).sum()
    }

    pub fn add(&self, rhs: &Self) -> Self {
        debug_assert_eq!(self.order, rhs.order);
        Self {
            order: self.order,
            data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| a + b).collect(),
        }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        debug_assert_eq!(self.order, rhs.order);
        Self {
            order: self.order,
            data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| a - b).collect(),
        }
    }

    pub fn scaled(&self, factor: T) -> Self {
        Self {
            order: self.order,
            data: self.data.iter().map(|&a| a * factor).collect(),
        }
    }

    /// `self += alpha * other`
    pub fn add_scaled(&mut self, alpha: T, other: &Self) {
        debug_assert_eq!(self.order, other.order);
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a += alpha * b;
        }
    }

    pub fn to_dense(&self) -> Matrix<T> {
        Matrix::from_fn(self.order, self.order, |i, j| self.get(i, j))
    }

    /// Number of stored nonzero entries in the lower triangle.
    pub fn nnz_lower(&self) -> usize {
        self.data.iter().filter(|&&x| x != T::zero()).count()
    }

    pub fn cast<U: Real>(&self) -> SymMatrix<U> {
        SymMatrix {
            order: self.order,
            data: self.data.iter().map(|&x| U::lit(x.to_f64_lossy())).collect(),
        }
    }
}
