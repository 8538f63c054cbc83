use crate::C64;
use ndarray::Array2;
use std::ops::{Add, Index, IndexMut, Sub};

/// Dense square complex matrix in the `J_z` basis.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexOperator(Array2<C64>);

impl ComplexOperator {
    pub fn zeros(dim: usize) -> Self {
        ComplexOperator(Array2::zeros((dim, dim)))
    }

    pub fn identity(dim: usize) -> Self {
        ComplexOperator(Array2::eye(dim))
    }

    /// Wraps a square array. Panics if `array` is not square.
    pub fn from_array(array: Array2<C64>) -> Self {
        assert_eq!(array.nrows(), array.ncols(), "operator must be square");
        ComplexOperator(array)
    }

    pub fn from_diagonal(diag: &[C64]) -> Self {
        let mut a = Array2::zeros((diag.len(), diag.len()));
        for (i, &d) in diag.iter().enumerate() {
            a[(i, i)] = d;
        }
        ComplexOperator(a)
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let mut a = Array2::zeros((diag.len(), diag.len()));
        for (i, &d) in diag.iter().enumerate() {
            a[(i, i)] = C64::new(d, 0.0);
        }
        ComplexOperator(a)
    }

    /// Outer product `|v><v|` scaled by `weight`.
    pub fn outer(v: &[C64], weight: f64) -> Self {
        let n = v.len();
        let mut a = Array2::zeros((n, n));
        for i in 0..n {
            if v[i] == C64::new(0.0, 0.0) {
                continue;
            }
            let vi = v[i] * weight;
            for k in 0..n {
                a[(i, k)] = vi * v[k].conj();
            }
        }
        ComplexOperator(a)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_array(&self) -> &Array2<C64> {
        &self.0
    }

    pub fn as_array_mut(&mut self) -> &mut Array2<C64> {
        &mut self.0
    }

    pub fn into_array(self) -> Array2<C64> {
        self.0
    }

    pub fn diagonal(&self) -> Vec<C64> {
        self.0.diag().to_vec()
    }

    pub fn diagonal_re(&self) -> Vec<f64> {
        self.0.diag().iter().map(|z| z.re).collect()
    }

    pub fn trace(&self) -> C64 {
        self.0.diag().sum()
    }

    pub fn matmul(&self, other: &ComplexOperator) -> ComplexOperator {
        ComplexOperator(self.0.dot(&other.0))
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        let n = self.dim();
        assert_eq!(v.len(), n);
        (0..n)
            .map(|i| self.0.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn adjoint(&self) -> ComplexOperator {
        ComplexOperator(self.0.t().mapv(|z| z.conj()))
    }

    pub fn scale(&self, s: C64) -> ComplexOperator {
        ComplexOperator(self.0.mapv(|z| z * s))
    }

    pub fn commutator(&self, other: &ComplexOperator) -> ComplexOperator {
        &self.matmul(other) - &other.matmul(self)
    }

    /// Largest elementwise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &ComplexOperator) -> f64 {
        assert_eq!(self.dim(), other.dim());
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest modulus of an off-diagonal element.
    pub fn max_offdiagonal(&self) -> f64 {
        let n = self.dim();
        let mut m: f64 = 0.0;
        for i in 0..n {
            for k in 0..n {
                if i != k {
                    m = m.max(self.0[(i, k)].norm());
                }
            }
        }
        m
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        let n = self.dim();
        for i in 0..n {
            for k in i..n {
                if (self.0[(i, k)] - self.0[(k, i)].conj()).norm() > tol {
                    return false;
                }
            }
        }
        true
    }

    /// `max |U U^dagger - 1|`.
    pub fn unitarity_defect(&self) -> f64 {
        let prod = self.matmul(&self.adjoint());
        prod.max_abs_diff(&ComplexOperator::identity(self.dim()))
    }
}

impl Index<(usize, usize)> for ComplexOperator {
    type Output = C64;
    fn index(&self, idx: (usize, usize)) -> &C64 {
        &self.0[idx]
    }
}

impl IndexMut<(usize, usize)> for ComplexOperator {
    fn index_mut(&mut self, idx: (usize, usize)) -> &mut C64 {
        &mut self.0[idx]
    }
}

impl Add for &ComplexOperator {
    type Output = ComplexOperator;
    fn add(self, rhs: &ComplexOperator) -> ComplexOperator {
        ComplexOperator(&self.0 + &rhs.0)
    }
}

impl Sub for &ComplexOperator {
    type Output = ComplexOperator;
    fn sub(self, rhs: &ComplexOperator) -> ComplexOperator {
        ComplexOperator(&self.0 - &rhs.0)
    }
}
