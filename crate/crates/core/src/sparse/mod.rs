//! Sparse and dense kernels shared by every other module.

mod csr;
mod dense;
pub mod mtx;
mod vector;

pub use csr::CsrMatrix;
pub use dense::{lu_solve, DenseMatrix, SymEig};
pub(crate) use dense::cholesky_substitute;
pub use vector::{axpy, dot, fused_update, norm2, unfused_update};

/// A square linear map `y = A x`.
///
/// Implementations write every entry of `y`. Callers guarantee that both
/// slices have length `nrows()`.
pub trait LinearOperator {
    fn nrows(&self) -> usize;
    fn apply(&self, x: &[f64], y: &mut [f64]);
}

impl<T: LinearOperator + ?Sized> LinearOperator for &T {
    fn nrows(&self) -> usize {
        (**self).nrows()
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        (**self).apply(x, y)
    }
}

/// Wraps an operator and counts its applications.
pub struct CountingOperator<'a, A: LinearOperator + ?Sized> {
    inner: &'a A,
    count: std::cell::Cell<usize>,
}

impl<'a, A: LinearOperator + ?Sized> CountingOperator<'a, A> {
    pub fn new(inner: &'a A) -> Self {
        Self { inner, count: std::cell::Cell::new(0) }
    }

    pub fn count(&self) -> usize {
        self.count.get()
    }
}

impl<A: LinearOperator + ?Sized> LinearOperator for CountingOperator<'_, A> {
    fn nrows(&self) -> usize {
        self.inner.nrows()
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.count.set(self.count.get() + 1);
        self.inner.apply(x, y)
    }
}
