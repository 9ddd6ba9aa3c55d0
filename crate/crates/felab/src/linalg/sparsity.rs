//! Sparsity patterns for compressed sparse row matrices.
//!
//! Construction happens in two stages: a [`DynamicSparsityPattern`] collects
//! row/column pairs in whatever order assembly produces them, and
//! [`DynamicSparsityPattern::compress`] turns the result into the immutable
//! CSR [`SparsityPattern`] that matrices are allocated from.

/// Mutable builder that accepts duplicate insertions in arbitrary order.
#[derive(Debug, Clone)]
pub struct DynamicSparsityPattern {
    n_rows: usize,
    n_cols: usize,
    rows: Vec<Vec<usize>>,
}

impl DynamicSparsityPattern {
    pub fn new(n_rows: usize, n_cols: usize) -> Self {
        Self {
            n_rows,
            n_cols,
            rows: vec![Vec::new(); n_rows],
        }
    }

    pub fn square(n: usize) -> Self {
        Self::new(n, n)
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn add(&mut self, row: usize, col: usize) {
        assert!(row < self.n_rows && col < self.n_cols);
        self.rows[row].push(col);
    }

    /// Adds the full outer product of `rows x cols`, the typical pattern for
    /// one cell's coupling block.
    pub fn add_block(&mut self, rows: &[usize], cols: &[usize]) {
        for &r in rows {
            for &c in cols {
                self.add(r, c);
            }
        }
    }

    /// Sorts each row, removes duplicates and freezes the result.
    pub fn compress(self) -> SparsityPattern {
        let mut row_ptr = Vec::with_capacity(self.n_rows + 1);
        let mut cols = Vec::new();
        row_ptr.push(0);
        for mut row in self.rows {
            row.sort_unstable();
            row.dedup();
            cols.extend_from_slice(&row);
            row_ptr.push(cols.len());
        }
        SparsityPattern {
            n_cols: self.n_cols,
            row_ptr,
            cols,
        }
    }
}

/// Immutable CSR pattern: `row_ptr` offsets into the sorted `cols` array.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparsityPattern {
    n_cols: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
}

impl SparsityPattern {
    pub fn n_rows(&self) -> usize {
        self.row_ptr.len() - 1
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn n_nonzeros(&self) -> usize {
        self.cols.len()
    }

    /// Column indices of one row, ascending.
    pub fn row(&self, row: usize) -> &[usize] {
        &self.cols[self.row_ptr[row]..self.row_ptr[row + 1]]
    }

    pub fn row_range(&self, row: usize) -> std::ops::Range<usize> {
        self.row_ptr[row]..self.row_ptr[row + 1]
    }

    /// Position of `(row, col)` in the value array, if present.
    pub fn position(&self, row: usize, col: usize) -> Option<usize> {
        let range = self.row_range(row);
        self.cols[range.clone()]
            .binary_search(&col)
            .ok()
            .map(|k| range.start + k)
    }

    pub fn contains(&self, row: usize, col: usize) -> bool {
        self.position(row, col).is_some()
    }

    /// True if for every stored `(i, j)` the transposed `(j, i)` is stored too.
    pub fn is_symmetric(&self) -> bool {
        if self.n_rows() != self.n_cols {
            return false;
        }
        (0..self.n_rows()).all(|r| self.row(r).iter().all(|&c| self.contains(c, r)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compress_sorts_and_dedups() {
        let mut dsp = DynamicSparsityPattern::square(3);
        dsp.add(0, 2);
        dsp.add(0, 0);
        dsp.add(0, 2);
        dsp.add(2, 1);
        let sp = dsp.compress();
        assert_eq!(sp.n_rows(), 3);
        assert_eq!(sp.n_nonzeros(), 3);
        assert_eq!(sp.row(0), &[0, 2]);
        assert_eq!(sp.row(1), &[] as &[usize]);
        assert_eq!(sp.row(2), &[1]);
    }

    #[test]
    fn block_insertion_gives_dense_coupling() {
        // One 4-dof cell inserted twice still yields a dense 4x4 block.
        let mut dsp = DynamicSparsityPattern::square(4);
        let dofs = [0, 1, 2, 3];
        dsp.add_block(&dofs, &dofs);
        dsp.add_block(&dofs, &dofs);
        let sp = dsp.compress();
        assert_eq!(sp.n_nonzeros(), 16);
        assert!(sp.is_symmetric());
    }

    #[test]
    fn position_lookup() {
        let mut dsp = DynamicSparsityPattern::square(3);
        dsp.add_block(&[0, 1], &[0, 1]);
        dsp.add(2, 2);
        let sp = dsp.compress();
        assert_eq!(sp.position(0, 1), Some(1));
        assert_eq!(sp.position(2, 2), Some(4));
        assert_eq!(sp.position(2, 0), None);
        assert!(sp.contains(1, 0));
        assert!(!sp.contains(0, 2));
    }

    #[test]
    fn asymmetric_pattern_detected() {
        let mut dsp = DynamicSparsityPattern::square(2);
        dsp.add(0, 0);
        dsp.add(1, 1);
        dsp.add(0, 1);
        let sp = dsp.compress();
        assert!(!sp.is_symmetric());
    }
}
