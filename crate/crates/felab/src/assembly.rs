//! Global assembly of the Laplace bilinear form and error evaluation.
//!
//! The central loop is the textbook one: for every active cell, integrate
//! `∇φ_i · ∇φ_j` and `φ_i f` with the mapped quadrature rule, then scatter
//! through the constraints into the global system.

use std::f64::consts::PI;

use crate::dofs::{AffineConstraints, DoFHandler, ScalarFunction};
use crate::error::{Error, Result};
use crate::fe::{FiniteElementQ, Quadrature};
use crate::geometry::{Point, Tensor1};
use crate::linalg::{DenseMatrix, DynamicSparsityPattern, SparseMatrix, SparsityPattern};
use crate::mapping::{FEValues, MappingQ, UpdateFlags};
use crate::mesh::Triangulation;

/// Builds the CSR pattern covering every post-constraint coupling plus the
/// placeholder diagonals of constrained DoFs.
pub fn build_sparsity<const D: usize>(
    dh: &DoFHandler<D>,
    constraints: &AffineConstraints,
) -> Result<SparsityPattern> {
    let n = dh.n_dofs()?;
    let mut dsp = DynamicSparsityPattern::square(n);
    for &cell in dh.cells()? {
        let dofs = dh.cell_dof_indices(cell)?;
        let resolved = constraints.resolved_indices(dofs);
        dsp.add_block(&resolved, &resolved);
        for &g in dofs {
            if constraints.is_constrained(g) {
                dsp.add(g, g);
            }
        }
    }
    Ok(dsp.compress())
}

/// Assembles `A` and `b` for `-Δu = f` with the given constraints.
///
/// `fev` must have been constructed with values, gradients, JxW and
/// quadrature points enabled.
pub fn assemble_laplace<const D: usize>(
    tri: &Triangulation<D>,
    dh: &DoFHandler<D>,
    constraints: &AffineConstraints,
    fev: &mut FEValues<D>,
    f: &dyn ScalarFunction<D>,
    matrix: &mut SparseMatrix,
    rhs: &mut [f64],
) -> Result<()> {
    let n = fev.dofs_per_cell();
    let mut local_a = DenseMatrix::zeros(n, n);
    let mut local_b = vec![0.0; n];

    for &cell in dh.cells()? {
        fev.reinit(tri, cell)?;
        for i in 0..n {
            local_b[i] = 0.0;
            for j in 0..n {
                local_a[(i, j)] = 0.0;
            }
        }
        for q in 0..fev.n_quadrature_points() {
            let jxw = fev.jxw(q)?;
            let f_q = f.value(&fev.quadrature_point(q)?);
            for i in 0..n {
                let grad_i = fev.shape_grad(i, q)?;
                local_b[i] += fev.shape_value(i, q)? * f_q * jxw;
                for j in 0..n {
                    local_a[(i, j)] += grad_i.dot(&fev.shape_grad(j, q)?) * jxw;
                }
            }
        }
        constraints.distribute_local_to_global(
            &local_a,
            &local_b,
            dh.cell_dof_indices(cell)?,
            matrix,
            rhs,
        )?;
    }
    Ok(())
}

/// Assembles only the load vector `b_i = ∫ f φ_i dx`, with constrained
/// rows redirected to their masters.
///
/// This is the companion of the matrix-free operators, which never form a
/// matrix and treat all constraints as homogeneous. The elimination terms
/// an inhomogeneous constraint would add require cell matrices; use
/// [`assemble_laplace`] for those. `fev` needs `VALUES`, `JXW` and
/// `QUADRATURE_POINTS`.
pub fn assemble_rhs<const D: usize>(
    tri: &Triangulation<D>,
    dh: &DoFHandler<D>,
    constraints: &AffineConstraints,
    fev: &mut FEValues<D>,
    f: &dyn ScalarFunction<D>,
    rhs: &mut [f64],
) -> Result<()> {
    let n = fev.dofs_per_cell();
    let mut local_b = vec![0.0; n];
    for &cell in dh.cells()? {
        fev.reinit(tri, cell)?;
        local_b.iter_mut().for_each(|b| *b = 0.0);
        for q in 0..fev.n_quadrature_points() {
            let jxw = fev.jxw(q)?;
            let f_q = f.value(&fev.quadrature_point(q)?);
            for i in 0..n {
                local_b[i] += fev.shape_value(i, q)? * f_q * jxw;
            }
        }
        constraints.distribute_local_rhs(&local_b, dh.cell_dof_indices(cell)?, rhs);
    }
    Ok(())
}

/// L2 and H1-seminorm errors of a finite element solution.
#[derive(Debug, Clone, Copy)]
pub struct ErrorNorms {
    pub l2: f64,
    pub h1_semi: f64,
}

/// Integrates `||u_h - u||` with a quadrature rule two points richer than
/// the element degree, so the error itself dominates the quadrature error.
/// The exact solution must provide a gradient.
pub fn compute_error_norms<const D: usize>(
    tri: &Triangulation<D>,
    dh: &DoFHandler<D>,
    solution: &[f64],
    exact: &dyn ScalarFunction<D>,
    mapping_degree: usize,
) -> Result<ErrorNorms> {
    let fe = FiniteElementQ::<D>::new(dh.degree());
    let n = fe.dofs_per_cell();
    let quadrature = Quadrature::gauss(dh.degree() + 2);
    let flags = UpdateFlags::VALUES
        | UpdateFlags::GRADIENTS
        | UpdateFlags::JXW
        | UpdateFlags::QUADRATURE_POINTS;
    let mut fev = FEValues::new(fe, MappingQ::new(mapping_degree), quadrature, flags);

    let mut l2 = 0.0;
    let mut h1 = 0.0;
    for &cell in dh.cells()? {
        fev.reinit(tri, cell)?;
        let dofs = dh.cell_dof_indices(cell)?;
        for q in 0..fev.n_quadrature_points() {
            let x_q = fev.quadrature_point(q)?;
            let jxw = fev.jxw(q)?;
            let mut u_h = 0.0;
            let mut grad_h = crate::geometry::Tensor1::<D>::zero();
            for i in 0..n {
                let coeff = solution[dofs[i]];
                u_h += coeff * fev.shape_value(i, q)?;
                grad_h = grad_h + fev.shape_grad(i, q)? * coeff;
            }
            let du = u_h - exact.value(&x_q);
            l2 += du * du * jxw;
            let grad_exact = exact.gradient(&x_q).ok_or_else(|| {
                Error::InvalidInput("H1 error needs the exact gradient".into())
            })?;
            let dg = grad_h - grad_exact;
            h1 += dg.dot(&dg) * jxw;
        }
    }
    Ok(ErrorNorms {
        l2: l2.sqrt(),
        h1_semi: h1.sqrt(),
    })
}

/// Manufactured solution `u = Π_d sin(π x_d)`, zero on the unit cube
/// boundary.
#[derive(Debug, Clone, Copy)]
pub struct SineProduct;

impl<const D: usize> ScalarFunction<D> for SineProduct {
    fn value(&self, p: &Point<D>) -> f64 {
        (0..D).map(|d| (PI * p[d]).sin()).product()
    }

    fn gradient(&self, p: &Point<D>) -> Option<Tensor1<D>> {
        let mut g = Tensor1::zero();
        for k in 0..D {
            let mut v = PI * (PI * p[k]).cos();
            for d in 0..D {
                if d != k {
                    v *= (PI * p[d]).sin();
                }
            }
            g[k] = v;
        }
        Some(g)
    }
}

/// `f = -Δ(SineProduct) = D π² Π_d sin(π x_d)`.
#[derive(Debug, Clone, Copy)]
pub struct SineProductRhs;

impl<const D: usize> ScalarFunction<D> for SineProductRhs {
    fn value(&self, p: &Point<D>) -> f64 {
        D as f64 * PI * PI * <SineProduct as ScalarFunction<D>>::value(&SineProduct, p)
    }
}
