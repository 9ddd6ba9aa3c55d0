//! Small dense matrices and a Cholesky factorization.
//!
//! This is deliberately minimal: the only dense solves in the library are
//! multigrid coarse grids and test oracles, both far below the size where a
//! tuned LAPACK would matter.

use crate::error::{Error, Result};
use crate::linalg::sparse::SparseMatrix;

/// Row-major dense matrix.
#[derive(Debug, Clone)]
pub struct DenseMatrix {
    n_rows: usize,
    n_cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        Self {
            n_rows,
            n_cols,
            data: vec![0.0; n_rows * n_cols],
        }
    }

    pub fn from_sparse(matrix: &SparseMatrix) -> Self {
        let mut dense = Self::zeros(matrix.n_rows(), matrix.n_cols());
        for row in 0..matrix.n_rows() {
            for (col, value) in matrix.row_entries(row) {
                dense[(row, col)] = value;
            }
        }
        dense
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn vmult(&self, dst: &mut [f64], src: &[f64]) {
        assert_eq!(dst.len(), self.n_rows);
        assert_eq!(src.len(), self.n_cols);
        for (row, out) in dst.iter_mut().enumerate() {
            let r = &self.data[row * self.n_cols..(row + 1) * self.n_cols];
            *out = r.iter().zip(src).map(|(a, s)| a * s).sum();
        }
    }

    /// Cholesky factorization `A = L L^T`; fails with [`Error::Breakdown`]
    /// when the matrix is not symmetric positive definite.
    pub fn cholesky(&self) -> Result<CholeskyFactor> {
        assert_eq!(self.n_rows, self.n_cols);
        let n = self.n_rows;
        let mut l = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let mut sum = self[(i, j)];
                for k in 0..j {
                    sum -= l[i * n + k] * l[j * n + k];
                }
                if i == j {
                    if sum <= 0.0 {
                        return Err(Error::Breakdown(format!(
                            "nonpositive Cholesky pivot {sum:.3e} at index {i}"
                        )));
                    }
                    l[i * n + i] = sum.sqrt();
                } else {
                    l[i * n + j] = sum / l[j * n + j];
                }
            }
        }
        Ok(CholeskyFactor { n, l })
    }
}

impl std::ops::Index<(usize, usize)> for DenseMatrix {
    type Output = f64;

    fn index(&self, (row, col): (usize, usize)) -> &f64 {
        &self.data[row * self.n_cols + col]
    }
}

impl std::ops::IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (row, col): (usize, usize)) -> &mut f64 {
        &mut self.data[row * self.n_cols + col]
    }
}

/// Lower-triangular Cholesky factor, ready for repeated solves.
#[derive(Debug, Clone)]
pub struct CholeskyFactor {
    n: usize,
    l: Vec<f64>,
}

impl CholeskyFactor {
    pub fn size(&self) -> usize {
        self.n
    }

    /// Solves `A x = b` via forward and backward substitution.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.n);
        let n = self.n;
        let mut y = b.to_vec();
        for i in 0..n {
            for k in 0..i {
                y[i] -= self.l[i * n + k] * y[k];
            }
            y[i] /= self.l[i * n + i];
        }
        for i in (0..n).rev() {
            for k in i + 1..n {
                y[i] -= self.l[k * n + i] * y[k];
            }
            y[i] /= self.l[i * n + i];
        }
        y
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::sparsity::DynamicSparsityPattern;

    fn spd_example() -> DenseMatrix {
        let mut a = DenseMatrix::zeros(3, 3);
        // pascal-like SPD matrix with known factorization
        let entries = [[4.0, 2.0, 2.0], [2.0, 5.0, 3.0], [2.0, 3.0, 6.0]];
        for i in 0..3 {
            for j in 0..3 {
                a[(i, j)] = entries[i][j];
            }
        }
        a
    }

    #[test]
    fn cholesky_reconstructs_matrix() {
        let a = spd_example();
        let f = a.cholesky().unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let mut sum = 0.0;
                for k in 0..3 {
                    sum += f.l[i * 3 + k] * f.l[j * 3 + k];
                }
                assert!((sum - a[(i, j)]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn solve_recovers_known_solution() {
        let a = spd_example();
        let x_exact = [1.0, -2.0, 0.5];
        let mut b = [0.0; 3];
        a.vmult(&mut b, &x_exact);
        let x = a.cholesky().unwrap().solve(&b);
        for (xi, ei) in x.iter().zip(&x_exact) {
            assert!((xi - ei).abs() < 1e-13);
        }
    }

    #[test]
    fn indefinite_matrix_rejected() {
        let mut a = DenseMatrix::zeros(2, 2);
        a[(0, 0)] = 1.0;
        a[(1, 1)] = -1.0;
        assert!(matches!(a.cholesky(), Err(Error::Breakdown(_))));
    }

    #[test]
    fn from_sparse_round_trip() {
        let mut dsp = DynamicSparsityPattern::square(3);
        dsp.add(0, 0);
        dsp.add(1, 2);
        let mut s = SparseMatrix::from_pattern(dsp.compress());
        s.set(0, 0, 2.5).unwrap();
        s.set(1, 2, -1.0).unwrap();
        let d = DenseMatrix::from_sparse(&s);
        assert_eq!(d[(0, 0)], 2.5);
        assert_eq!(d[(1, 2)], -1.0);
        assert_eq!(d[(2, 2)], 0.0);
    }
}
