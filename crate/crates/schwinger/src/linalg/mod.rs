//! Sparse storage, Lanczos and dense helpers shared by the physics modules.

mod chebyshev;
mod csr;
mod dense;
mod lanczos;
mod scalar;

pub use chebyshev::{chebyshev_lowest, FilterOptions};
pub use csr::{Csr, LinearOperator};
pub use dense::{dense_eigh, hermitian_to_dense, tridiagonal_eigh};
pub use lanczos::{lanczos_lowest, lanczos_lowest_light, LanczosOptions, StartVector};
pub use scalar::Scalar;

pub fn dot<T: Scalar>(x: &[T], y: &[T]) -> T {
    x.iter().zip(y).fold(T::zero(), |acc, (a, b)| acc + a.conj() * *b)
}

pub fn norm<T: Scalar>(x: &[T]) -> f64 {
    x.iter().map(|v| v.abs2()).sum::<f64>().sqrt()
}

pub fn axpy<T: Scalar>(alpha: T, x: &[T], y: &mut [T]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi = *yi + alpha * *xi;
    }
}

pub fn scale<T: Scalar>(x: &mut [T], s: f64) {
    for v in x.iter_mut() {
        *v = v.scale(s);
    }
}
