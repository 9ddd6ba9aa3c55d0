//! Level structure of the geometric multigrid method.
//!
//! Each refinement level of a globally refined triangulation carries its own
//! DoF enumeration over all cells of that level, a matrix-free operator with
//! homogeneous Dirichlet level constraints, and a Chebyshev smoother.
//! Because the spaces are nested, prolongation is plain interpolation of the
//! coarse finite element function onto the fine support points, and
//! restriction is its exact transpose.

use crate::dofs::{
    interpolate_boundary_values, AffineConstraints, ConstantFunction, DoFHandler,
};
use crate::error::{Error, Result};
use crate::fe::FiniteElementQ;
use crate::geometry::Point;
use crate::linalg::{
    cg_solve, CholeskyFactor, DenseMatrix, DynamicSparsityPattern, JacobiPrecondition,
    SolverControl, SparseMatrix,
};
use crate::mapping::MappingQ;
use crate::matrix_free::{build_matrix_free, LaplaceOperatorMF};
use crate::mesh::Triangulation;
use crate::multigrid::chebyshev::{estimate_largest_eigenvalue, ChebyshevSmoother};

/// Tuning knobs of the hierarchy; the defaults are the ones used throughout
/// the tests and the command line driver.
#[derive(Debug, Clone)]
pub struct MGOptions {
    /// Chebyshev degree for pre- and post-smoothing.
    pub smoothing_degree: usize,
    /// Smoothing interval is `[lambda_max/smoothing_range, lambda_max]`.
    pub smoothing_range: f64,
    /// Safety factor applied to the Lanczos Ritz value.
    pub eigenvalue_safety: f64,
    pub lanczos_steps: usize,
    pub batch_width: usize,
    /// Below this many coarse DoFs the coarse problem is factorized densely;
    /// otherwise it is solved by Jacobi-CG to 1e-12.
    pub coarse_dense_threshold: usize,
    /// Run the level smoothers in single precision. The outer iteration and
    /// the coarse solve stay in double precision.
    pub single_precision_smoother: bool,
}

impl Default for MGOptions {
    fn default() -> Self {
        Self {
            smoothing_degree: 6,
            smoothing_range: 20.0,
            eigenvalue_safety: 1.2,
            lanczos_steps: 12,
            batch_width: 4,
            coarse_dense_threshold: 100,
            single_precision_smoother: false,
        }
    }
}

pub(super) struct MGLevel<const D: usize> {
    pub(super) dh: DoFHandler<D>,
    pub(super) constraints: AffineConstraints,
    pub(super) operator: LaplaceOperatorMF<D, f64>,
    pub(super) smoother: ChebyshevSmoother<f64>,
    pub(super) single: Option<(LaplaceOperatorMF<D, f32>, ChebyshevSmoother<f32>)>,
    pub(super) n_dofs: usize,
}

pub(super) enum CoarseSolver {
    Dense(CholeskyFactor),
    Iterative,
}

pub struct MGHierarchy<const D: usize> {
    pub(super) levels: Vec<MGLevel<D>>,
    /// `prolongations[l]` interpolates level `l` into level `l + 1`.
    pub(super) prolongations: Vec<SparseMatrix>,
    pub(super) coarse: CoarseSolver,
}

/// Builds the level hierarchy for a globally refined triangulation.
///
/// `dirichlet_ids` lists the boundary ids carrying homogeneous Dirichlet
/// conditions; they are eliminated on every level so the smoothers act on
/// the constrained operator.
pub fn build_hierarchy<const D: usize>(
    tri: &Triangulation<D>,
    degree: usize,
    mapping: &MappingQ<D>,
    dirichlet_ids: &[u32],
    options: &MGOptions,
) -> Result<MGHierarchy<D>> {
    if !tri.is_globally_refined() {
        return Err(Error::NotGloballyRefined(
            "the level hierarchy needs a globally refined mesh; adaptive meshes have \
             partially refined levels"
                .into(),
        ));
    }
    let fe = FiniteElementQ::<D>::new(degree);
    let mut levels = Vec::with_capacity(tri.n_levels());
    for l in 0..tri.n_levels() {
        let mut dh = DoFHandler::new();
        dh.distribute_on_cells(tri, &fe, tri.cells_on_level(l).collect())?;
        let mut constraints = AffineConstraints::new();
        for &id in dirichlet_ids {
            interpolate_boundary_values(tri, &dh, id, &ConstantFunction(0.0), &mut constraints)?;
        }
        constraints.close();
        let n_dofs = dh.n_dofs()?;

        let data = build_matrix_free::<D, f64>(tri, &dh, &constraints, mapping, options.batch_width)?;
        let operator = LaplaceOperatorMF::new(data);
        let diagonal = operator.compute_diagonal();
        let lambda = estimate_largest_eigenvalue(
            |dst: &mut [f64], src: &[f64]| operator.apply(dst, src).expect("matching lengths"),
            &diagonal,
            options.lanczos_steps,
            options.eigenvalue_safety,
        )?;
        let smoother = ChebyshevSmoother::new(
            options.smoothing_degree,
            &diagonal,
            lambda,
            options.smoothing_range,
        )?;
        let single = if options.single_precision_smoother {
            let data32 =
                build_matrix_free::<D, f32>(tri, &dh, &constraints, mapping, options.batch_width)?;
            let op32 = LaplaceOperatorMF::new(data32);
            let diag32 = op32.compute_diagonal();
            let sm32 = ChebyshevSmoother::new(
                options.smoothing_degree,
                &diag32,
                lambda,
                options.smoothing_range,
            )?;
            Some((op32, sm32))
        } else {
            None
        };
        levels.push(MGLevel {
            dh,
            constraints,
            operator,
            smoother,
            single,
            n_dofs,
        });
    }

    let mut prolongations = Vec::with_capacity(levels.len().saturating_sub(1));
    for l in 0..levels.len().saturating_sub(1) {
        prolongations.push(build_prolongation(
            tri,
            &levels[l].dh,
            &levels[l + 1].dh,
            &fe,
            l,
        )?);
    }

    let n0 = levels[0].n_dofs;
    let coarse = if n0 < options.coarse_dense_threshold {
        let mut dense = DenseMatrix::zeros(n0, n0);
        let mut e = vec![0.0; n0];
        let mut col = vec![0.0; n0];
        for j in 0..n0 {
            e[j] = 1.0;
            levels[0].operator.apply(&mut col, &e)?;
            e[j] = 0.0;
            for i in 0..n0 {
                dense[(i, j)] = col[i];
            }
        }
        CoarseSolver::Dense(dense.cholesky()?)
    } else {
        CoarseSolver::Iterative
    };

    Ok(MGHierarchy {
        levels,
        prolongations,
        coarse,
    })
}

/// Interpolation matrix from the level-`level` space into its refinement.
///
/// Every fine DoF row is filled once, from the first coarse cell whose
/// children cover it; the entries are the coarse shape functions evaluated
/// at the fine support point expressed in coarse reference coordinates.
fn build_prolongation<const D: usize>(
    tri: &Triangulation<D>,
    dh_coarse: &DoFHandler<D>,
    dh_fine: &DoFHandler<D>,
    fe: &FiniteElementQ<D>,
    level: usize,
) -> Result<SparseMatrix> {
    let n_fine = dh_fine.n_dofs()?;
    let n_coarse = dh_coarse.n_dofs()?;
    let mut rows: Vec<Option<Vec<(usize, f64)>>> = vec![None; n_fine];
    for cell in tri.cells_on_level(level) {
        let coarse_dofs = dh_coarse.cell_dof_indices(cell)?;
        for k in 0..(1 << D) {
            let child = tri
                .child(cell, k)
                .ok_or_else(|| Error::InvalidMesh("missing child on refined level".into()))?;
            for (a, &fine_dof) in dh_fine.cell_dof_indices(child)?.iter().enumerate() {
                if rows[fine_dof].is_some() {
                    continue;
                }
                let t = fe.tensor_index(a);
                let mut reference = [0.0; D];
                for d in 0..D {
                    let bit = ((k >> d) & 1) as f64;
                    reference[d] = 0.5 * (fe.nodes_1d()[t[d]] + bit);
                }
                let point = Point::new(reference);
                let mut entries = Vec::new();
                for (j, &coarse_dof) in coarse_dofs.iter().enumerate() {
                    let v = fe.shape_value(j, &point)?;
                    if v != 0.0 {
                        entries.push((coarse_dof, v));
                    }
                }
                rows[fine_dof] = Some(entries);
            }
        }
    }

    let mut dsp = DynamicSparsityPattern::new(n_fine, n_coarse);
    for (i, row) in rows.iter().enumerate() {
        let row = row
            .as_ref()
            .ok_or_else(|| Error::InvalidMesh(format!("fine DoF {i} not reached by any child")))?;
        for &(j, _) in row {
            dsp.add(i, j);
        }
    }
    let mut matrix = SparseMatrix::from_pattern(dsp.compress());
    for (i, row) in rows.iter().enumerate() {
        for &(j, v) in row.as_ref().unwrap() {
            matrix.set(i, j, v)?;
        }
    }
    Ok(matrix)
}

impl<const D: usize> MGHierarchy<D> {
    pub fn n_levels(&self) -> usize {
        self.levels.len()
    }

    pub fn n_dofs_on_level(&self, level: usize) -> usize {
        self.levels[level].n_dofs
    }

    pub fn finest_operator(&self) -> &LaplaceOperatorMF<D, f64> {
        &self.levels[self.levels.len() - 1].operator
    }

    pub fn operator_on_level(&self, level: usize) -> &LaplaceOperatorMF<D, f64> {
        &self.levels[level].operator
    }

    pub fn dof_handler_on_level(&self, level: usize) -> &DoFHandler<D> {
        &self.levels[level].dh
    }

    pub fn constraints_on_level(&self, level: usize) -> &AffineConstraints {
        &self.levels[level].constraints
    }

    pub fn prolongation(&self, level: usize) -> &SparseMatrix {
        &self.prolongations[level]
    }

    /// `x_fine = P x_coarse`, interpolating level `level` into `level + 1`.
    pub fn prolongate(&self, level: usize, x_coarse: &[f64], x_fine: &mut [f64]) -> Result<()> {
        let p = &self.prolongations[level];
        check_len(x_coarse.len(), p.n_cols())?;
        check_len(x_fine.len(), p.n_rows())?;
        p.vmult(x_fine, x_coarse);
        Ok(())
    }

    /// `r_coarse = P^T r_fine`, the exact transpose of [`Self::prolongate`].
    pub fn restrict(&self, level: usize, r_fine: &[f64], r_coarse: &mut [f64]) -> Result<()> {
        let p = &self.prolongations[level];
        check_len(r_fine.len(), p.n_rows())?;
        check_len(r_coarse.len(), p.n_cols())?;
        r_coarse.iter_mut().for_each(|v| *v = 0.0);
        p.tvmult_add(r_coarse, r_fine);
        Ok(())
    }

    pub(super) fn coarse_solve(&self, b: &[f64], x: &mut [f64]) -> Result<()> {
        match &self.coarse {
            CoarseSolver::Dense(factor) => {
                x.copy_from_slice(&factor.solve(b));
                Ok(())
            }
            CoarseSolver::Iterative => {
                let level = &self.levels[0];
                let diagonal = level.operator.compute_diagonal();
                let jacobi = JacobiPrecondition::new(&diagonal)?;
                x.iter_mut().for_each(|v| *v = 0.0);
                let control = SolverControl::new(10 * level.n_dofs + 100, 1e-12);
                cg_solve(&level.operator, &jacobi, x, b, control)?;
                Ok(())
            }
        }
    }
}

fn check_len(got: usize, expected: usize) -> Result<()> {
    if got != expected {
        return Err(Error::LengthMismatch { expected, got });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::{assemble_laplace, build_sparsity};
    use crate::mapping::{FEValues, UpdateFlags};
    use crate::mesh::{hyper_cube, CellHandle};
    use crate::fe::Quadrature;

    fn refined_square(refinements: usize) -> Triangulation<2> {
        let mut tri = hyper_cube::<2>(0.0, 1.0, 1).unwrap();
        tri.refine_global(refinements).unwrap();
        tri
    }

    fn all_boundary_ids() -> Vec<u32> {
        (0..4).collect()
    }

    #[test]
    fn q1_level_dof_counts() {
        let tri = refined_square(3);
        let h = build_hierarchy(&tri, 1, &MappingQ::new(1), &all_boundary_ids(), &MGOptions::default())
            .unwrap();
        assert_eq!(h.n_levels(), 4);
        let counts: Vec<usize> = (0..4).map(|l| h.n_dofs_on_level(l)).collect();
        assert_eq!(counts, vec![4, 9, 25, 81]);
    }

    #[test]
    fn adaptive_mesh_is_rejected() {
        let mut tri = hyper_cube::<2>(0.0, 1.0, 2).unwrap();
        tri.set_refine_flag(CellHandle { level: 0, index: 0 }).unwrap();
        tri.execute_refinement().unwrap();
        let err = build_hierarchy(&tri, 1, &MappingQ::new(1), &[], &MGOptions::default())
            .err()
            .unwrap();
        assert!(matches!(err, Error::NotGloballyRefined(_)));
    }

    #[test]
    fn level_operator_matches_direct_assembly() {
        let tri = refined_square(2);
        let ids = all_boundary_ids();
        let h =
            build_hierarchy(&tri, 1, &MappingQ::new(1), &ids, &MGOptions::default()).unwrap();
        for level in 0..h.n_levels() {
            let dh = h.dof_handler_on_level(level);
            let constraints = h.constraints_on_level(level);
            let pattern = build_sparsity(dh, constraints).unwrap();
            let mut matrix = SparseMatrix::from_pattern(pattern);
            let mut rhs = vec![0.0; dh.n_dofs().unwrap()];
            let mut fev = FEValues::new(
                FiniteElementQ::<2>::new(1),
                MappingQ::new(1),
                Quadrature::<2>::gauss(2),
                UpdateFlags::VALUES
                    | UpdateFlags::GRADIENTS
                    | UpdateFlags::JXW
                    | UpdateFlags::QUADRATURE_POINTS,
            );
            assemble_laplace(
                &tri,
                dh,
                constraints,
                &mut fev,
                &ConstantFunction(0.0),
                &mut matrix,
                &mut rhs,
            )
            .unwrap();
            let n = dh.n_dofs().unwrap();
            let mut x = vec![0.0; n];
            for (i, xi) in x.iter_mut().enumerate() {
                *xi = ((i * 7 + level) % 5) as f64 - 2.0;
            }
            constraints.set_zero(&mut x);
            let mut y_mf = vec![0.0; n];
            let mut y_as = vec![0.0; n];
            h.operator_on_level(level).apply(&mut y_mf, &x).unwrap();
            matrix.vmult(&mut y_as, &x);
            for (a, b) in y_mf.iter().zip(&y_as) {
                assert!((a - b).abs() < 1e-11, "level {level}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn prolongation_preserves_constants() {
        for degree in [1usize, 2, 3] {
            let tri = refined_square(2);
            // boundary ids only influence the level constraints; the
            // transfer matrices are identical with or without them
            let h = build_hierarchy(
                &tri,
                degree,
                &MappingQ::new(1),
                &all_boundary_ids(),
                &MGOptions::default(),
            )
            .unwrap();
            for l in 0..h.n_levels() - 1 {
                let ones = vec![1.0; h.n_dofs_on_level(l)];
                let mut fine = vec![0.0; h.n_dofs_on_level(l + 1)];
                h.prolongate(l, &ones, &mut fine).unwrap();
                for &v in &fine {
                    assert!((v - 1.0).abs() < 1e-14, "degree {degree}: {v}");
                }
            }
        }
    }

    #[test]
    fn q1_edge_midpoint_prolongates_to_endpoint_average() {
        let tri = refined_square(1);
        let h = build_hierarchy(&tri, 1, &MappingQ::new(1), &all_boundary_ids(), &MGOptions::default())
            .unwrap();
        let coarse: Vec<f64> = (0..4).map(|i| (i * i) as f64 + 1.0).collect();
        let mut fine = vec![0.0; h.n_dofs_on_level(1)];
        h.prolongate(0, &coarse, &mut fine).unwrap();

        let dh0 = h.dof_handler_on_level(0);
        let dh1 = h.dof_handler_on_level(1);
        let coarse_value_at = |x: f64, y: f64| -> f64 {
            (0..4)
                .find(|&d| {
                    let p = dh0.support_point(d).unwrap();
                    (p[0] - x).abs() < 1e-12 && (p[1] - y).abs() < 1e-12
                })
                .map(|d| coarse[d])
                .unwrap()
        };
        for dof in 0..fine.len() {
            let p = dh1.support_point(dof).unwrap();
            let on_x = (p[0] - 0.5).abs() < 1e-12;
            let on_y = (p[1] - 0.5).abs() < 1e-12;
            let expected = if on_x && on_y {
                // cell center: mean of all four corners
                0.25 * (coarse.iter().sum::<f64>())
            } else if on_x {
                0.5 * (coarse_value_at(0.0, p[1]) + coarse_value_at(1.0, p[1]))
            } else if on_y {
                0.5 * (coarse_value_at(p[0], 0.0) + coarse_value_at(p[0], 1.0))
            } else {
                coarse_value_at(p[0], p[1])
            };
            assert!(
                (fine[dof] - expected).abs() < 1e-14,
                "dof at ({}, {}): {} vs {expected}",
                p[0],
                p[1],
                fine[dof]
            );
        }
    }

    #[test]
    fn restriction_is_the_transpose() {
        let tri = refined_square(3);
        let h = build_hierarchy(&tri, 2, &MappingQ::new(1), &all_boundary_ids(), &MGOptions::default())
            .unwrap();
        for l in 0..h.n_levels() - 1 {
            let nc = h.n_dofs_on_level(l);
            let nf = h.n_dofs_on_level(l + 1);
            let x: Vec<f64> = (0..nc).map(|i| ((i * 13 + 7) % 11) as f64 - 5.0).collect();
            let y: Vec<f64> = (0..nf).map(|i| ((i * 5 + 3) % 13) as f64 - 6.0).collect();
            let mut px = vec![0.0; nf];
            h.prolongate(l, &x, &mut px).unwrap();
            let mut ry = vec![0.0; nc];
            h.restrict(l, &y, &mut ry).unwrap();
            let lhs: f64 = px.iter().zip(&y).map(|(a, b)| a * b).sum();
            let rhs: f64 = x.iter().zip(&ry).map(|(a, b)| a * b).sum();
            let scale = lhs.abs().max(rhs.abs()).max(1.0);
            assert!((lhs - rhs).abs() <= 1e-12 * scale, "level {l}: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn transfer_length_mismatch_reported() {
        let tri = refined_square(1);
        let h = build_hierarchy(&tri, 1, &MappingQ::new(1), &all_boundary_ids(), &MGOptions::default())
            .unwrap();
        let mut fine = vec![0.0; h.n_dofs_on_level(1)];
        let err = h.prolongate(0, &[0.0; 3], &mut fine).unwrap_err();
        assert!(matches!(err, Error::LengthMismatch { .. }));
        let mut coarse = vec![0.0; 4];
        assert!(h.restrict(0, &[0.0; 5], &mut coarse).is_err());
    }

    /// The transfer operators reproduce the Galerkin coarse operator: for Q1
    /// on uniform levels, P^T A_fine P equals the directly assembled coarse
    /// matrix. Constraints are left out; elimination and coarsening do not
    /// commute entrywise.
    #[test]
    fn galerkin_coarse_operator() {
        let tri = refined_square(4);
        let h = build_hierarchy(&tri, 1, &MappingQ::new(1), &all_boundary_ids(), &MGOptions::default())
            .unwrap();
        let mut empty = AffineConstraints::new();
        empty.close();
        let empty = &empty;
        let assemble_level = |level: usize| -> DenseMatrix {
            let dh = h.dof_handler_on_level(level);
            let pattern = build_sparsity(dh, empty).unwrap();
            let mut matrix = SparseMatrix::from_pattern(pattern);
            let mut rhs = vec![0.0; dh.n_dofs().unwrap()];
            let mut fev = FEValues::new(
                FiniteElementQ::<2>::new(1),
                MappingQ::new(1),
                Quadrature::<2>::gauss(2),
                UpdateFlags::VALUES
                    | UpdateFlags::GRADIENTS
                    | UpdateFlags::JXW
                    | UpdateFlags::QUADRATURE_POINTS,
            );
            assemble_laplace(
                &tri,
                dh,
                empty,
                &mut fev,
                &ConstantFunction(0.0),
                &mut matrix,
                &mut rhs,
            )
            .unwrap();
            DenseMatrix::from_sparse(&matrix)
        };
        for l in 0..h.n_levels() - 1 {
            let nf = h.n_dofs_on_level(l + 1);
            if nf > 289 {
                continue;
            }
            let nc = h.n_dofs_on_level(l);
            let a_fine = assemble_level(l + 1);
            let a_coarse = assemble_level(l);
            // columns of A_fine P
            let mut ap = vec![vec![0.0; nf]; nc];
            for j in 0..nc {
                let mut e = vec![0.0; nc];
                e[j] = 1.0;
                let mut pe = vec![0.0; nf];
                h.prolongate(l, &e, &mut pe).unwrap();
                let mut col = vec![0.0; nf];
                a_fine.vmult(&mut col, &pe);
                ap[j] = col;
            }
            for i in 0..nc {
                let mut e = vec![0.0; nc];
                e[i] = 1.0;
                let mut pi = vec![0.0; nf];
                h.prolongate(l, &e, &mut pi).unwrap();
                for j in 0..nc {
                    let rap: f64 = pi.iter().zip(&ap[j]).map(|(a, b)| a * b).sum();
                    assert!(
                        (rap - a_coarse[(i, j)]).abs() <= 1e-10,
                        "levels {l}->{}: entry ({i},{j}) {rap} vs {}",
                        l + 1,
                        a_coarse[(i, j)]
                    );
                }
            }
        }
    }

    #[test]
    fn level_constraints_eliminate_the_boundary() {
        let tri = refined_square(2);
        let ids = all_boundary_ids();
        let h =
            build_hierarchy(&tri, 1, &MappingQ::new(1), &ids, &MGOptions::default()).unwrap();
        // Q1 boundary nodes on a (2^l + 1)^2 grid
        for l in 0..h.n_levels() {
            let side = (1usize << l) + 1;
            let expected = side * side - (side - 2).pow(2);
            assert_eq!(h.constraints_on_level(l).n_constraints(), expected);
        }
    }
}
