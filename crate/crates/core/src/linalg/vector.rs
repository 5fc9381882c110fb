use std::ops::{Add, Deref, DerefMut, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::scalar::Real;

/// Dense real vector.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Vector<T = f64>(Vec<T>);

impl<T: Real> Vector<T> {
    pub fn zeros(len: usize) -> Self {
        Self(vec![T::zero(); len])
    }

    pub fn from_vec(entries: Vec<T>) -> Self {
        Self(entries)
    }

    pub fn from_slice(entries: &[T]) -> Self {
        Self(entries.to_vec())
    }

    /// Unit vector `e_index` of the given length.
    pub fn unit(len: usize, index: usize) -> Self {
        let mut v = Self::zeros(len);
        v.0[index] = T::one();
        v
    }

    pub fn filled(len: usize, value: T) -> Self {
        Self(vec![value; len])
    }

    pub fn into_inner(self) -> Vec<T> {
        self.0
    }

    pub fn as_slice(&self) -> &[T] {
        &self.0
    }

    pub fn dot(&self, other: &Self) -> T {
        debug_assert_eq!(self.len(), other.len());
        self.0.iter().zip(&other.0).map(|(&a, &b)| a * b).sum()
    }

    pub fn norm_sq(&self) -> T {
        self.dot(self)
    }

    pub fn norm(&self) -> T {
        self.norm_sq().sqrt()
    }

    pub fn norm_inf(&self) -> T {
        self.0.iter().fold(T::zero(), |m, &x| m.max(x.abs()))
    }

    pub fn scaled(&self, factor: T) -> Self {
        Self(self.0.iter().map(|&x| x * factor).collect())
    }

    /// `self += alpha * x`
    pub fn axpy(&mut self, alpha: T, x: &Self) {
        debug_assert_eq!(self.len(), x.len());
        for (a, &b) in self.0.iter_mut().zip(&x.0) {
            *a += alpha * b;
        }
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }

    /// Mean of a non-empty list of equally sized vectors.
    pub fn mean(items: &[Self]) -> Self {
        assert!(!items.is_empty(), "mean of an empty list");
        let mut acc = Self::zeros(items[0].len());
        for v in items {
            acc.axpy(T::one(), v);
        }
        acc.scaled(T::one() / T::of_usize(items.len()))
    }

    pub fn cast<U: Real>(&self) -> Vector<U> {
        Vector(self.0.iter().map(|&x| U::lit(x.to_f64_lossy())).collect())
    }
}

impl<T> Deref for Vector<T> {
    type Target = [T];
    fn deref(&self) -> &[T] {
        &self.0
    }
}

impl<T> DerefMut for Vector<T> {
    fn deref_mut(&mut self) -> &mut [T] {
        &mut self.0
    }
}

impl<T> From<Vec<T>> for Vector<T> {
    fn from(v: Vec<T>) -> Self {
        Self(v)
    }
}

impl<T> FromIterator<T> for Vector<T> {
    fn from_iter<I: IntoIterator<Item = T>>(iter: I) -> Self {
        Self(iter.into_iter().collect())
    }
}

impl<T: Real> Add for &Vector<T> {
    type Output = Vector<T>;
    fn add(self, rhs: Self) -> Vector<T> {
        debug_assert_eq!(self.len(), rhs.len());
        self.iter().zip(rhs.iter()).map(|(&a, &b)| a + b).collect()
    }
}

impl<T: Real> Sub for &Vector<T> {
    type Output = Vector<T>;
    fn sub(self, rhs: Self) -> Vector<T> {
        debug_assert_eq!(self.len(), rhs.len());
        self.iter().zip(rhs.iter()).map(|(&a, &b)| a - b).collect()
    }
}

impl<T: Real> Mul<T> for &Vector<T> {
    type Output = Vector<T>;
    fn mul(self, rhs: T) -> Vector<T> {
        self.scaled(rhs)
    }
}

impl<T: Real> Neg for &Vector<T> {
    type Output = Vector<T>;
    fn neg(self) -> Vector<T> {
        self.iter().map(|&a| -a).collect()
    }
}
