//! Precomputed geometry, constraint and batching tables for the matrix-free
//! operator.
//!
//! Cells are grouped into batches of `w` lanes processed together; all
//! per-quadrature-point data is stored with the lane as the innermost index
//! (array-of-struct-of-array layout). Batches are further grouped into
//! colors such that no two cells in different batches of one color touch a
//! common global DoF after constraint resolution; within a batch, lanes are
//! scattered sequentially, so intra-batch sharing is harmless.

use std::collections::HashSet;

use crate::dofs::{AffineConstraints, DoFHandler};
use crate::error::{Error, Result};
use crate::fe::{FiniteElementQ, Quadrature};
use crate::mapping::MappingQ;
use crate::matrix_free::real::Real;
use crate::mesh::{CellHandle, Triangulation};

pub const MAX_BATCH_WIDTH: usize = 8;

/// How one lane-local DoF maps to global vector entries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DofResolution {
    /// Reads and writes a single free global DoF.
    Free(u32),
    /// Affine combination of masters; `start..start+len` indexes the shared
    /// pools in [`MatrixFreeData`].
    Constrained { start: u32, len: u32 },
}

#[derive(Debug)]
pub struct Batch<T> {
    pub cells: Vec<CellHandle>,
    pub n_filled: usize,
    /// `[local * w + lane]`
    pub resolution: Vec<DofResolution>,
    /// Transposed inverse Jacobian, `[(q*D*D + i*D + j) * w + lane]`.
    pub jinv_t: Vec<T>,
    /// `[q * w + lane]`
    pub jxw: Vec<T>,
}

#[derive(Debug)]
pub struct MatrixFreeData<const D: usize, T> {
    pub(crate) degree: usize,
    /// basis functions per direction
    pub(crate) n1: usize,
    /// quadrature points per direction (= n1 by construction)
    pub(crate) nq: usize,
    pub(crate) w: usize,
    pub(crate) n_dofs: usize,
    pub(crate) batches: Vec<Batch<T>>,
    /// colors as lists of batch indices; concatenated they enumerate every
    /// batch exactly once, in deterministic order
    pub(crate) colors: Vec<Vec<u32>>,
    /// 1d value/derivative matrices `[q * n1 + k]` and transposes
    /// `[k * nq + q]`
    pub(crate) values: Vec<T>,
    pub(crate) grads: Vec<T>,
    pub(crate) values_t: Vec<T>,
    pub(crate) grads_t: Vec<T>,
    /// shared constraint pools indexed by [`DofResolution::Constrained`]
    pub(crate) res_indices: Vec<u32>,
    pub(crate) res_weights: Vec<T>,
    /// sorted global indices of constrained DoFs
    pub(crate) constrained: Vec<u32>,
}

impl<const D: usize, T: Real> MatrixFreeData<D, T> {
    pub fn n_batches(&self) -> usize {
        self.batches.len()
    }

    pub fn n_colors(&self) -> usize {
        self.colors.len()
    }

    pub fn batch(&self, b: usize) -> &Batch<T> {
        &self.batches[b]
    }

    pub fn colors(&self) -> &[Vec<u32>] {
        &self.colors
    }

    pub fn batch_width(&self) -> usize {
        self.w
    }

    pub fn n_dofs(&self) -> usize {
        self.n_dofs
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn dofs_per_cell(&self) -> usize {
        self.n1.pow(D as u32)
    }

    pub fn n_q_points(&self) -> usize {
        self.nq.pow(D as u32)
    }

    /// Global DoFs a batch may write to, after constraint resolution.
    pub fn batch_write_set(&self, b: usize) -> HashSet<u32> {
        let batch = &self.batches[b];
        let mut set = HashSet::new();
        for lane in 0..batch.n_filled {
            for local in 0..self.dofs_per_cell() {
                match batch.resolution[local * self.w + lane] {
                    DofResolution::Free(g) => {
                        set.insert(g);
                    }
                    DofResolution::Constrained { start, len } => {
                        for k in start..start + len {
                            set.insert(self.res_indices[k as usize]);
                        }
                    }
                }
            }
        }
        set
    }

    /// Same as [`Self::batch_write_set`] but for a single lane.
    pub fn cell_write_set(&self, b: usize, lane: usize) -> HashSet<u32> {
        let batch = &self.batches[b];
        let mut set = HashSet::new();
        for local in 0..self.dofs_per_cell() {
            match batch.resolution[local * self.w + lane] {
                DofResolution::Free(g) => {
                    set.insert(g);
                }
                DofResolution::Constrained { start, len } => {
                    for k in start..start + len {
                        set.insert(self.res_indices[k as usize]);
                    }
                }
            }
        }
        set
    }
}

/// Precomputes all tables for the matrix-free Laplace operator.
///
/// The quadrature is fixed to `p + 1` Gauss points per direction, identical
/// to assembly, so the two operators agree to rounding.
pub fn build_matrix_free<const D: usize, T: Real>(
    tri: &Triangulation<D>,
    dh: &DoFHandler<D>,
    constraints: &AffineConstraints,
    mapping: &MappingQ<D>,
    batch_width: usize,
) -> Result<MatrixFreeData<D, T>> {
    if !(1..=MAX_BATCH_WIDTH).contains(&batch_width) {
        return Err(Error::InvalidInput(format!(
            "batch width {batch_width} outside 1..={MAX_BATCH_WIDTH}"
        )));
    }
    assert!(constraints.is_closed(), "constraints must be closed");

    let degree = dh.degree();
    let fe = FiniteElementQ::<D>::new(degree);
    let n1 = degree + 1;
    let nq = degree + 1;
    let n_dofs = dh.n_dofs()?;
    let w = batch_width;
    let n_loc = fe.dofs_per_cell();

    // 1d interpolation and differentiation matrices on the Gauss points
    let quad_1d = Quadrature::<1>::gauss(nq);
    let mut values = vec![T::ZERO; nq * n1];
    let mut grads = vec![T::ZERO; nq * n1];
    let mut values_t = vec![T::ZERO; n1 * nq];
    let mut grads_t = vec![T::ZERO; n1 * nq];
    for q in 0..nq {
        let x = quad_1d.point(q)[0];
        for k in 0..n1 {
            let v = T::from_f64(fe.basis_1d().value(k, x));
            let g = T::from_f64(fe.basis_1d().derivative(k, x));
            values[q * n1 + k] = v;
            grads[q * n1 + k] = g;
            values_t[k * nq + q] = v;
            grads_t[k * nq + q] = g;
        }
    }

    // constraint pools
    let mut res_indices: Vec<u32> = Vec::new();
    let mut res_weights: Vec<T> = Vec::new();
    let mut constrained: Vec<u32> = Vec::new();
    let mut resolution_of = vec![DofResolution::Free(0); n_dofs];
    for g in 0..n_dofs {
        match constraints.line(g) {
            Some(line) => {
                let start = res_indices.len() as u32;
                for &(d, c) in &line.entries {
                    res_indices.push(d as u32);
                    res_weights.push(T::from_f64(c));
                }
                resolution_of[g] = DofResolution::Constrained {
                    start,
                    len: line.entries.len() as u32,
                };
                constrained.push(g as u32);
            }
            None => resolution_of[g] = DofResolution::Free(g as u32),
        }
    }

    // reference quadrature in D dimensions, same ordering as the kernels
    let quadrature = Quadrature::<D>::gauss(nq);
    let n_q = quadrature.len();

    let cells: Vec<CellHandle> = dh.cells()?.to_vec();
    let n_batches = cells.len().div_ceil(w);
    let mut batches = Vec::with_capacity(n_batches);
    for b in 0..n_batches {
        let first = b * w;
        let filled: Vec<CellHandle> = cells[first..cells.len().min(first + w)].to_vec();
        let n_filled = filled.len();
        // padding duplicates the last real cell so the kernel never sees
        // uninitialized geometry
        let mut lane_cells = filled.clone();
        while lane_cells.len() < w {
            lane_cells.push(*filled.last().unwrap());
        }

        let mut resolution = vec![DofResolution::Free(0); n_loc * w];
        let mut jinv_t = vec![T::ZERO; n_q * D * D * w];
        let mut jxw = vec![T::ZERO; n_q * w];
        for (lane, &cell) in lane_cells.iter().enumerate() {
            let dofs = dh.cell_dof_indices(cell)?;
            for local in 0..n_loc {
                resolution[local * w + lane] = resolution_of[dofs[local]];
            }
            let cm = mapping.cell_mapping(tri, cell)?;
            for q in 0..n_q {
                let j = cm.jacobian(mapping, &quadrature.point(q));
                let det = j.det();
                let jit = j.invert()?.transpose();
                for i in 0..D {
                    for jj in 0..D {
                        jinv_t[(q * D * D + i * D + jj) * w + lane] = T::from_f64(jit.0[i][jj]);
                    }
                }
                jxw[q * w + lane] = T::from_f64(det.abs() * quadrature.weight(q));
            }
        }
        batches.push(Batch {
            cells: lane_cells,
            n_filled,
            resolution,
            jinv_t,
            jxw,
        });
    }

    // greedy coloring of batches: a batch joins the first color whose
    // accumulated write set it does not intersect
    let mut colors: Vec<Vec<u32>> = Vec::new();
    let mut color_sets: Vec<HashSet<u32>> = Vec::new();
    let data_probe = MatrixFreeData {
        degree,
        n1,
        nq,
        w,
        n_dofs,
        batches,
        colors: Vec::new(),
        values,
        grads,
        values_t,
        grads_t,
        res_indices,
        res_weights,
        constrained,
    };
    for b in 0..data_probe.n_batches() {
        let set = data_probe.batch_write_set(b);
        let slot = color_sets
            .iter()
            .position(|existing| existing.is_disjoint(&set));
        match slot {
            Some(c) => {
                colors[c].push(b as u32);
                color_sets[c].extend(&set);
            }
            None => {
                colors.push(vec![b as u32]);
                color_sets.push(set);
            }
        }
    }

    let mut data = data_probe;
    data.colors = colors;
    Ok(data)
}
