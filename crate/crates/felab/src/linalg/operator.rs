//! Operator and preconditioner abstractions shared by the iterative solvers.

use crate::error::{Error, Result};
use crate::linalg::sparse::SparseMatrix;

/// Anything that can apply `dst = A * src` for a square operator.
pub trait LinearOperator {
    fn size(&self) -> usize;
    fn vmult(&self, dst: &mut [f64], src: &[f64]);
}

impl LinearOperator for SparseMatrix {
    fn size(&self) -> usize {
        assert_eq!(self.n_rows(), self.n_cols());
        self.n_rows()
    }

    fn vmult(&self, dst: &mut [f64], src: &[f64]) {
        SparseMatrix::vmult(self, dst, src);
    }
}

impl<T: LinearOperator + ?Sized> LinearOperator for &T {
    fn size(&self) -> usize {
        (**self).size()
    }

    fn vmult(&self, dst: &mut [f64], src: &[f64]) {
        (**self).vmult(dst, src)
    }
}

/// Applies an approximate inverse, `dst = P^{-1} * src`.
pub trait Preconditioner {
    fn apply(&self, dst: &mut [f64], src: &[f64]);
}

impl<T: Preconditioner + ?Sized> Preconditioner for &T {
    fn apply(&self, dst: &mut [f64], src: &[f64]) {
        (**self).apply(dst, src)
    }
}

/// No-op preconditioner.
#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityPrecondition;

impl Preconditioner for IdentityPrecondition {
    fn apply(&self, dst: &mut [f64], src: &[f64]) {
        dst.copy_from_slice(src);
    }
}

/// Diagonal (Jacobi) preconditioner built from an operator diagonal.
#[derive(Debug, Clone)]
pub struct JacobiPrecondition {
    inv_diagonal: Vec<f64>,
}

impl JacobiPrecondition {
    /// Fails with [`Error::ZeroDiagonal`] if any entry is zero or negative;
    /// the solvers here target symmetric positive definite systems where that
    /// always indicates a broken assembly.
    pub fn new(diagonal: &[f64]) -> Result<Self> {
        let mut inv_diagonal = Vec::with_capacity(diagonal.len());
        for (i, &d) in diagonal.iter().enumerate() {
            if d <= 0.0 {
                return Err(Error::ZeroDiagonal(i));
            }
            inv_diagonal.push(1.0 / d);
        }
        Ok(Self { inv_diagonal })
    }

    pub fn from_matrix(matrix: &SparseMatrix) -> Result<Self> {
        Self::new(&matrix.diagonal())
    }
}

impl Preconditioner for JacobiPrecondition {
    fn apply(&self, dst: &mut [f64], src: &[f64]) {
        debug_assert_eq!(dst.len(), self.inv_diagonal.len());
        for ((d, s), inv) in dst.iter_mut().zip(src).zip(&self.inv_diagonal) {
            *d = s * inv;
        }
    }
}
