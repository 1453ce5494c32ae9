use super::{dense_eigh, hermitian_to_dense, Csr};
use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

/// Real or complex field element used by the sparse kernels.
pub trait Scalar:
    Copy
    + Debug
    + Send
    + Sync
    + PartialEq
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + 'static
{
    fn zero() -> Self;
    fn from_re(x: f64) -> Self;
    fn conj(self) -> Self;
    fn re(self) -> f64;
    fn abs2(self) -> f64;
    fn scale(self, s: f64) -> Self;
    fn to_complex(self) -> Complex64;
    /// All eigenpairs of a Hermitian matrix, ascending, vectors as columns.
    fn dense_eigen(m: &Csr<Self>) -> (Vec<f64>, Vec<Vec<Self>>);
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn from_re(x: f64) -> Self {
        x
    }
    fn conj(self) -> Self {
        self
    }
    fn re(self) -> f64 {
        self
    }
    fn abs2(self) -> f64 {
        self * self
    }
    fn scale(self, s: f64) -> Self {
        self * s
    }
    fn to_complex(self) -> Complex64 {
        Complex64::new(self, 0.0)
    }
    fn dense_eigen(m: &Csr<Self>) -> (Vec<f64>, Vec<Vec<Self>>) {
        let n = m.n();
        let mut d = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            for (j, v) in m.row(i) {
                d[(i, j)] = v;
            }
        }
        let eig = SymmetricEigen::new(d);
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let vals = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let vecs = order.iter().map(|&k| eig.eigenvectors.column(k).iter().copied().collect()).collect();
        (vals, vecs)
    }
}

impl Scalar for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn from_re(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    fn conj(self) -> Self {
        Complex64::conj(&self)
    }
    fn re(self) -> f64 {
        self.re
    }
    fn abs2(self) -> f64 {
        self.norm_sqr()
    }
    fn scale(self, s: f64) -> Self {
        self * s
    }
    fn to_complex(self) -> Complex64 {
        self
    }
    fn dense_eigen(m: &Csr<Self>) -> (Vec<f64>, Vec<Vec<Self>>) {
        let (vals, vecs) = dense_eigh(hermitian_to_dense(m));
        let cols = (0..vals.len()).map(|k| vecs.column(k).iter().copied().collect()).collect();
        (vals, cols)
    }
}
