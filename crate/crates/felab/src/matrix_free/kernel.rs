//! Sum-factorized cell kernel for the Laplace operator.
//!
//! All fields live in `[entry * w + lane]` layout with the lane innermost.
//! The kernel evaluates reference gradients with `d` successive 1d
//! contractions per direction, applies the metric at each quadrature point
//! and integrates with the transposed contractions, for a per-cell cost of
//! Θ((p+1)^(d+1)) 1d multiply-adds instead of the Θ((p+1)^(2d)) of a dense
//! local matvec.

use crate::matrix_free::data::{Batch, MatrixFreeData};
use crate::matrix_free::real::Real;

pub const MAX_LANES: usize = crate::matrix_free::data::MAX_BATCH_WIDTH;

/// Contracts `input` along `axis` with the `n_out x n_in` matrix, all other
/// axes (sizes in `sizes`, axis 0 fastest) unchanged. Returns the number of
/// multiply-adds performed.
#[allow(clippy::too_many_arguments)]
fn contract_1d<T: Real>(
    input: &[T],
    output: &mut [T],
    matrix: &[T],
    n_in: usize,
    n_out: usize,
    axis: usize,
    sizes: &[usize],
    w: usize,
) -> u64 {
    debug_assert_eq!(sizes[axis], n_in);
    let inner: usize = sizes[..axis].iter().product();
    let outer: usize = sizes[axis + 1..].iter().product();
    let mut madds = 0u64;
    for o in 0..outer {
        for q in 0..n_out {
            for i in 0..inner {
                let mut acc = [T::ZERO; MAX_LANES];
                for k in 0..n_in {
                    let m = matrix[q * n_in + k];
                    let base = ((o * n_in + k) * inner + i) * w;
                    for lane in 0..w {
                        acc[lane] += m * input[base + lane];
                    }
                }
                let out_base = ((o * n_out + q) * inner + i) * w;
                output[out_base..out_base + w].copy_from_slice(&acc[..w]);
                madds += (n_in * w) as u64;
            }
        }
    }
    madds
}

/// Scratch space reused across cells of one apply sweep.
pub struct KernelScratch<T> {
    field: Vec<T>,
    tmp: Vec<T>,
    grad: Vec<Vec<T>>,
}

impl<T: Real> KernelScratch<T> {
    pub fn new<const D: usize>(data: &MatrixFreeData<D, T>) -> Self {
        let max = data.n1.max(data.nq).pow(D as u32) * data.w;
        Self {
            field: vec![T::ZERO; max],
            tmp: vec![T::ZERO; max],
            grad: (0..D).map(|_| vec![T::ZERO; max]).collect(),
        }
    }
}

/// Applies the local Laplace operator to `u_local` (layout
/// `[local * w + lane]`), writing `v_local` and returning the multiply-add
/// count of all 1d contractions.
pub fn apply_cell_batch<const D: usize, T: Real>(
    data: &MatrixFreeData<D, T>,
    batch: &Batch<T>,
    u_local: &[T],
    v_local: &mut [T],
    scratch: &mut KernelScratch<T>,
) -> u64 {
    let w = data.w;
    let n1 = data.n1;
    let nq = data.nq;
    let n_loc = data.dofs_per_cell();
    let n_q = data.n_q_points();
    let mut madds = 0u64;

    // evaluate d reference gradient components at all quadrature points
    for dir in 0..D {
        let mut sizes = [n1; D];
        scratch.field[..n_loc * w].copy_from_slice(&u_local[..n_loc * w]);
        for axis in 0..D {
            let matrix = if axis == dir { &data.grads } else { &data.values };
            madds += contract_1d(
                &scratch.field,
                &mut scratch.tmp,
                matrix,
                sizes[axis],
                nq,
                axis,
                &sizes,
                w,
            );
            sizes[axis] = nq;
            let filled: usize = sizes.iter().product::<usize>() * w;
            scratch.field[..filled].copy_from_slice(&scratch.tmp[..filled]);
        }
        scratch.grad[dir][..n_q * w].copy_from_slice(&scratch.field[..n_q * w]);
    }

    // metric application per quadrature point and lane:
    // g = J^{-T} ghat, that = JxW * J^{-1} g
    for q in 0..n_q {
        let mut g = [[T::ZERO; MAX_LANES]; D];
        for (i, gi) in g.iter_mut().enumerate() {
            for (j, grad_j) in scratch.grad.iter().enumerate() {
                let m_base = (q * D * D + i * D + j) * w;
                for lane in 0..w {
                    gi[lane] += batch.jinv_t[m_base + lane] * grad_j[q * w + lane];
                }
            }
        }
        let mut t_hat = [[T::ZERO; MAX_LANES]; D];
        for (j, tj) in t_hat.iter_mut().enumerate() {
            for (i, gi) in g.iter().enumerate() {
                let m_base = (q * D * D + i * D + j) * w;
                for lane in 0..w {
                    tj[lane] += batch.jinv_t[m_base + lane] * gi[lane];
                }
            }
            for lane in 0..w {
                tj[lane] = tj[lane] * batch.jxw[q * w + lane];
            }
        }
        for (dir, td) in t_hat.iter().enumerate() {
            scratch.grad[dir][q * w..q * w + w].copy_from_slice(&td[..w]);
        }
    }

    // transposed integration: v += sum_dir (V^T ... D^T ...) t_hat_dir
    v_local[..n_loc * w].iter_mut().for_each(|v| *v = T::ZERO);
    for dir in 0..D {
        let mut sizes = [nq; D];
        scratch.field[..n_q * w].copy_from_slice(&scratch.grad[dir][..n_q * w]);
        for axis in 0..D {
            let matrix = if axis == dir {
                &data.grads_t
            } else {
                &data.values_t
            };
            madds += contract_1d(
                &scratch.field,
                &mut scratch.tmp,
                matrix,
                sizes[axis],
                n1,
                axis,
                &sizes,
                w,
            );
            sizes[axis] = n1;
            let filled: usize = sizes.iter().product::<usize>() * w;
            scratch.field[..filled].copy_from_slice(&scratch.tmp[..filled]);
        }
        for (v, &f) in v_local[..n_loc * w].iter_mut().zip(&scratch.field[..n_loc * w]) {
            *v += f;
        }
    }
    madds
}
