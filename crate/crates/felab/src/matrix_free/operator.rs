//! The matrix-free Laplace operator.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::LinearOperator;
use crate::matrix_free::data::{Batch, DofResolution, MatrixFreeData};
use crate::matrix_free::kernel::{apply_cell_batch, KernelScratch};
use crate::matrix_free::real::Real;

/// Applies the weak Laplacian `(grad v, grad u)` cell batch by cell batch,
/// never forming a global sparse matrix.
///
/// The action equals the assembled matrix on the free-DoF subspace; on
/// constrained DoFs the operator acts as the identity, `dst[c] = src[c]`.
/// Batches of one color are processed concurrently; the scatter into `dst`
/// follows the deterministic color order, so results do not depend on thread
/// count.
pub struct LaplaceOperatorMF<const D: usize, T> {
    data: MatrixFreeData<D, T>,
    madds: AtomicU64,
}

impl<const D: usize, T: Real> LaplaceOperatorMF<D, T> {
    pub fn new(data: MatrixFreeData<D, T>) -> Self {
        Self {
            data,
            madds: AtomicU64::new(0),
        }
    }

    pub fn data(&self) -> &MatrixFreeData<D, T> {
        &self.data
    }

    pub fn n_dofs(&self) -> usize {
        self.data.n_dofs()
    }

    /// Cumulative number of 1d-kernel multiply-adds performed by `apply`
    /// since construction or the last [`Self::reset_madd_count`].
    pub fn madd_count(&self) -> u64 {
        self.madds.load(Ordering::Relaxed)
    }

    pub fn reset_madd_count(&self) {
        self.madds.store(0, Ordering::Relaxed);
    }

    fn gather(&self, batch: &Batch<T>, src: &[T], u_local: &mut [T]) {
        let w = self.data.batch_width();
        for local in 0..self.data.dofs_per_cell() {
            for lane in 0..w {
                let idx = local * w + lane;
                u_local[idx] = match batch.resolution[idx] {
                    DofResolution::Free(g) => src[g as usize],
                    DofResolution::Constrained { start, len } => {
                        let mut acc = T::ZERO;
                        for k in start as usize..(start + len) as usize {
                            acc += self.data.res_weights[k]
                                * src[self.data.res_indices[k] as usize];
                        }
                        acc
                    }
                };
            }
        }
    }

    fn scatter(&self, batch: &Batch<T>, v_local: &[T], dst: &mut [T]) {
        let w = self.data.batch_width();
        for lane in 0..batch.n_filled {
            for local in 0..self.data.dofs_per_cell() {
                let v = v_local[local * w + lane];
                match batch.resolution[local * w + lane] {
                    DofResolution::Free(g) => dst[g as usize] += v,
                    DofResolution::Constrained { start, len } => {
                        for k in start as usize..(start + len) as usize {
                            dst[self.data.res_indices[k] as usize] +=
                                self.data.res_weights[k] * v;
                        }
                    }
                }
            }
        }
    }

    /// Computes `dst = A src`.
    ///
    /// Gathers resolve hanging-node constraints on the fly (fine values read
    /// as affine combinations of their masters), the cell kernel evaluates by
    /// sum factorization, and the scatter adds back through the constraint
    /// transpose. Padding lanes are computed but never scattered.
    pub fn apply(&self, dst: &mut [T], src: &[T]) -> Result<()> {
        let n = self.data.n_dofs();
        if src.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                got: src.len(),
            });
        }
        if dst.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                got: dst.len(),
            });
        }
        let n_lanes = self.data.dofs_per_cell() * self.data.batch_width();
        dst.iter_mut().for_each(|v| *v = T::ZERO);
        let mut total_madds = 0u64;
        for color in self.data.colors() {
            // compute in parallel, scatter sequentially in color order
            let results: Vec<(Vec<T>, u64)> = color
                .par_iter()
                .map_init(
                    || (KernelScratch::new(&self.data), vec![T::ZERO; n_lanes]),
                    |(scratch, u_local), &b| {
                        let batch = self.data.batch(b as usize);
                        self.gather(batch, src, u_local);
                        let mut v_local = vec![T::ZERO; n_lanes];
                        let madds =
                            apply_cell_batch(&self.data, batch, u_local, &mut v_local, scratch);
                        (v_local, madds)
                    },
                )
                .collect();
            for (&b, (v_local, madds)) in color.iter().zip(&results) {
                self.scatter(self.data.batch(b as usize), v_local, dst);
                total_madds += madds;
            }
        }
        for &c in &self.data.constrained {
            dst[c as usize] = src[c as usize];
        }
        self.madds.fetch_add(total_madds, Ordering::Relaxed);
        Ok(())
    }

    /// Diagonal of the constrained operator, computed cell-wise by pushing
    /// local unit vectors through the cell kernel. Constrained entries are 1
    /// to match the identity-block convention of [`Self::apply`].
    pub fn compute_diagonal(&self) -> Vec<T> {
        let n_loc = self.data.dofs_per_cell();
        let w = self.data.batch_width();
        let n_lanes = n_loc * w;
        let mut diag = vec![T::ZERO; self.data.n_dofs()];
        let mut scratch = KernelScratch::new(&self.data);
        let mut u_local = vec![T::ZERO; n_lanes];
        let mut v_local = vec![T::ZERO; n_lanes];
        let entries = |batch: &Batch<T>, local: usize, lane: usize| -> Vec<(u32, T)> {
            match batch.resolution[local * w + lane] {
                DofResolution::Free(g) => vec![(g, T::ONE)],
                DofResolution::Constrained { start, len } => (start as usize
                    ..(start + len) as usize)
                    .map(|k| (self.data.res_indices[k], self.data.res_weights[k]))
                    .collect(),
            }
        };
        for b in 0..self.data.n_batches() {
            let batch = self.data.batch(b);
            // per lane: which locals touch a given global DoF, with weights
            let mut touches: Vec<HashMap<u32, Vec<(usize, T)>>> = vec![HashMap::new(); w];
            for lane in 0..batch.n_filled {
                for local in 0..n_loc {
                    for (g, c) in entries(batch, local, lane) {
                        touches[lane].entry(g).or_default().push((local, c));
                    }
                }
            }
            for a in 0..n_loc {
                u_local.iter_mut().for_each(|v| *v = T::ZERO);
                for lane in 0..w {
                    u_local[a * w + lane] = T::ONE;
                }
                apply_cell_batch(&self.data, batch, &u_local, &mut v_local, &mut scratch);
                // v_local[b_loc, lane] is column a of the lane-local cell
                // matrix; accumulate (C^T A_cell C)_{gg} for every global g
                // reached from local a
                for lane in 0..batch.n_filled {
                    for (g, wa) in entries(batch, a, lane) {
                        let mut acc = T::ZERO;
                        for &(b_loc, wb) in &touches[lane][&g] {
                            acc += wb * v_local[b_loc * w + lane];
                        }
                        diag[g as usize] += wa * acc;
                    }
                }
            }
        }
        for &c in &self.data.constrained {
            diag[c as usize] = T::ONE;
        }
        diag
    }
}

impl<const D: usize> LinearOperator for LaplaceOperatorMF<D, f64> {
    fn size(&self) -> usize {
        self.data.n_dofs()
    }

    fn vmult(&self, dst: &mut [f64], src: &[f64]) {
        self.apply(dst, src).expect("vector lengths checked by caller");
    }
}
