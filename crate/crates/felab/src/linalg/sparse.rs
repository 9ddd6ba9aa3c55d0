//! Compressed sparse row matrix over a fixed sparsity pattern.

use crate::error::{Error, Result};
use crate::linalg::sparsity::SparsityPattern;

/// CSR matrix; the pattern is fixed at construction and writes outside it
/// fail with [`Error::SparsityMiss`].
#[derive(Debug, Clone)]
pub struct SparseMatrix {
    pattern: SparsityPattern,
    values: Vec<f64>,
}

impl SparseMatrix {
    pub fn from_pattern(pattern: SparsityPattern) -> Self {
        let values = vec![0.0; pattern.n_nonzeros()];
        Self { pattern, values }
    }

    pub fn n_rows(&self) -> usize {
        self.pattern.n_rows()
    }

    pub fn n_cols(&self) -> usize {
        self.pattern.n_cols()
    }

    pub fn n_nonzeros(&self) -> usize {
        self.values.len()
    }

    pub fn pattern(&self) -> &SparsityPattern {
        &self.pattern
    }

    pub fn set_zero(&mut self) {
        self.values.fill(0.0);
    }

    pub fn add(&mut self, row: usize, col: usize, value: f64) -> Result<()> {
        match self.pattern.position(row, col) {
            Some(k) => {
                self.values[k] += value;
                Ok(())
            }
            None => Err(Error::SparsityMiss { row, col }),
        }
    }

    pub fn set(&mut self, row: usize, col: usize, value: f64) -> Result<()> {
        match self.pattern.position(row, col) {
            Some(k) => {
                self.values[k] = value;
                Ok(())
            }
            None => Err(Error::SparsityMiss { row, col }),
        }
    }

    /// Stored value at `(row, col)`, or zero when outside the pattern.
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.pattern
            .position(row, col)
            .map_or(0.0, |k| self.values[k])
    }

    /// Iterates `(col, value)` over one row.
    pub fn row_entries(&self, row: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.pattern.row_range(row);
        self.pattern
            .row(row)
            .iter()
            .zip(&self.values[range])
            .map(|(&c, &v)| (c, v))
    }

    /// `dst = A * src`
    pub fn vmult(&self, dst: &mut [f64], src: &[f64]) {
        assert_eq!(dst.len(), self.n_rows());
        assert_eq!(src.len(), self.n_cols());
        for (row, out) in dst.iter_mut().enumerate() {
            let mut sum = 0.0;
            for (col, value) in self.row_entries(row) {
                sum += value * src[col];
            }
            *out = sum;
        }
    }

    /// `dst += A^T * src`; used for restriction with an assembled prolongation.
    pub fn tvmult_add(&self, dst: &mut [f64], src: &[f64]) {
        assert_eq!(dst.len(), self.n_cols());
        assert_eq!(src.len(), self.n_rows());
        for (row, &s) in src.iter().enumerate() {
            for (col, value) in self.row_entries(row) {
                dst[col] += value * s;
            }
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n_rows()).map(|i| self.get(i, i)).collect()
    }

    /// Maximum absolute difference between `(i, j)` and `(j, i)` entries.
    pub fn symmetry_defect(&self) -> f64 {
        let mut defect: f64 = 0.0;
        for row in 0..self.n_rows() {
            for (col, value) in self.row_entries(row) {
                defect = defect.max((value - self.get(col, row)).abs());
            }
        }
        defect
    }
}
