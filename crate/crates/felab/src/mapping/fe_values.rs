use crate::error::{Error, Result};
use crate::fe::{FiniteElementQ, Quadrature};
use crate::geometry::{Point, Tensor1};
use crate::mesh::{CellHandle, Triangulation};

use super::mapping_q::{CellMapping, MappingQ};

/// Selects which per-cell quantities [`FEValues::reinit`] computes.
///
/// The set is fixed at construction; asking for data outside it is an
/// error, so a forgotten flag surfaces immediately instead of as a zero.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct UpdateFlags(u8);

impl UpdateFlags {
    pub const NONE: UpdateFlags = UpdateFlags(0);
    pub const VALUES: UpdateFlags = UpdateFlags(1);
    pub const GRADIENTS: UpdateFlags = UpdateFlags(2);
    pub const JXW: UpdateFlags = UpdateFlags(4);
    pub const QUADRATURE_POINTS: UpdateFlags = UpdateFlags(8);

    pub fn contains(self, other: UpdateFlags) -> bool {
        self.0 & other.0 == other.0
    }
}

impl std::ops::BitOr for UpdateFlags {
    type Output = UpdateFlags;
    fn bitor(self, rhs: UpdateFlags) -> UpdateFlags {
        UpdateFlags(self.0 | rhs.0)
    }
}

/// Shape function data on the cell most recently passed to `reinit`.
///
/// Reference-cell tables (shape values and gradients at the quadrature
/// points, and the mapping's own basis tables) are computed once at
/// construction; `reinit` only performs the per-cell work of transforming
/// gradients, scaling quadrature weights, and mapping point locations.
#[derive(Debug)]
pub struct FEValues<const D: usize> {
    fe: FiniteElementQ<D>,
    mapping: MappingQ<D>,
    quadrature: Quadrature<D>,
    flags: UpdateFlags,
    /// Reference shape values, indexed `i * n_q + q`.
    ref_values: Vec<f64>,
    /// Reference shape gradients, indexed `i * n_q + q`.
    ref_grads: Vec<Tensor1<D>>,
    /// Mapping basis values and gradients at quadrature points, `k * n_q + q`.
    map_values: Vec<f64>,
    map_grads: Vec<Tensor1<D>>,
    // Per-cell buffers, refreshed by reinit.
    real_grads: Vec<Tensor1<D>>,
    jxw: Vec<f64>,
    q_points: Vec<Point<D>>,
    current_cell: Option<CellHandle>,
}

impl<const D: usize> FEValues<D> {
    pub fn new(
        fe: FiniteElementQ<D>,
        mapping: MappingQ<D>,
        quadrature: Quadrature<D>,
        flags: UpdateFlags,
    ) -> Self {
        let n_q = quadrature.len();
        let n_dofs = fe.dofs_per_cell();
        let mut ref_values = vec![0.0; n_dofs * n_q];
        let mut ref_grads = vec![Tensor1::zero(); n_dofs * n_q];
        for i in 0..n_dofs {
            for q in 0..n_q {
                let x = quadrature.point(q);
                ref_values[i * n_q + q] = fe.shape_value(i, &x).expect("in-range");
                ref_grads[i * n_q + q] = fe.shape_grad(i, &x).expect("in-range");
            }
        }
        let n_map = mapping.n_support_points();
        let mut map_values = vec![0.0; n_map * n_q];
        let mut map_grads = vec![Tensor1::zero(); n_map * n_q];
        for k in 0..n_map {
            for q in 0..n_q {
                let x = quadrature.point(q);
                map_values[k * n_q + q] = mapping.shape_value(k, &x);
                map_grads[k * n_q + q] = mapping.shape_grad(k, &x);
            }
        }
        FEValues {
            fe,
            mapping,
            quadrature,
            flags,
            ref_values,
            ref_grads,
            map_values,
            map_grads,
            real_grads: vec![Tensor1::zero(); n_dofs * n_q],
            jxw: vec![0.0; n_q],
            q_points: vec![Point::origin(); n_q],
            current_cell: None,
        }
    }

    pub fn n_quadrature_points(&self) -> usize {
        self.quadrature.len()
    }

    pub fn dofs_per_cell(&self) -> usize {
        self.fe.dofs_per_cell()
    }

    pub fn fe(&self) -> &FiniteElementQ<D> {
        &self.fe
    }

    pub fn quadrature(&self) -> &Quadrature<D> {
        &self.quadrature
    }

    pub fn mapping(&self) -> &MappingQ<D> {
        &self.mapping
    }

    /// Recomputes the per-cell buffers for `cell`.
    pub fn reinit(&mut self, tri: &Triangulation<D>, cell: CellHandle) -> Result<()> {
        self.current_cell = None;
        let cell_mapping = self.mapping.cell_mapping(tri, cell)?;
        let n_q = self.quadrature.len();
        let n_dofs = self.fe.dofs_per_cell();
        let needs_jacobian =
            self.flags.contains(UpdateFlags::GRADIENTS) || self.flags.contains(UpdateFlags::JXW);

        for q in 0..n_q {
            if needs_jacobian {
                let j = match &cell_mapping {
                    CellMapping::Cartesian { extents, .. } => {
                        crate::geometry::Tensor2::from_diagonal(*extents)
                    }
                    CellMapping::General { support_points } => {
                        let mut j = crate::geometry::Tensor2::zero();
                        for (k, sp) in support_points.iter().enumerate() {
                            let grad = self.map_grads[k * n_q + q];
                            for r in 0..D {
                                for c in 0..D {
                                    j.0[r][c] += sp[r] * grad[c];
                                }
                            }
                        }
                        j
                    }
                };
                if self.flags.contains(UpdateFlags::JXW) {
                    self.jxw[q] = j.det().abs() * self.quadrature.weight(q);
                }
                if self.flags.contains(UpdateFlags::GRADIENTS) {
                    let j_inv = j.invert()?;
                    for i in 0..n_dofs {
                        self.real_grads[i * n_q + q] =
                            j_inv.contract_transpose(&self.ref_grads[i * n_q + q]);
                    }
                }
            }
            if self.flags.contains(UpdateFlags::QUADRATURE_POINTS) {
                self.q_points[q] = match &cell_mapping {
                    CellMapping::Cartesian { origin, extents } => {
                        let x = self.quadrature.point(q);
                        let mut coords = [0.0; D];
                        for d in 0..D {
                            coords[d] = origin[d] + extents[d] * x[d];
                        }
                        Point::new(coords)
                    }
                    CellMapping::General { support_points } => {
                        let mut coords = [0.0; D];
                        for (k, sp) in support_points.iter().enumerate() {
                            let psi = self.map_values[k * n_q + q];
                            for d in 0..D {
                                coords[d] += psi * sp[d];
                            }
                        }
                        Point::new(coords)
                    }
                };
            }
        }
        self.current_cell = Some(cell);
        Ok(())
    }

    fn check_ready(&self, flag: UpdateFlags, name: &'static str) -> Result<()> {
        if !self.flags.contains(flag) {
            return Err(Error::UpdateFlagMissing(name));
        }
        if self.current_cell.is_none() {
            return Err(Error::NotInitialized);
        }
        Ok(())
    }

    fn check_indices(&self, i: usize, q: usize) -> Result<()> {
        if i >= self.fe.dofs_per_cell() {
            return Err(Error::IndexError {
                index: i,
                limit: self.fe.dofs_per_cell(),
            });
        }
        if q >= self.quadrature.len() {
            return Err(Error::IndexError {
                index: q,
                limit: self.quadrature.len(),
            });
        }
        Ok(())
    }

    /// Value of shape function `i` at quadrature point `q` (reference values
    /// carry over unchanged for the Lagrange pull-back).
    #[inline]
    pub fn shape_value(&self, i: usize, q: usize) -> Result<f64> {
        self.check_ready(UpdateFlags::VALUES, "values")?;
        self.check_indices(i, q)?;
        Ok(self.ref_values[i * self.quadrature.len() + q])
    }

    /// Real-space gradient of shape function `i` at quadrature point `q`.
    #[inline]
    pub fn shape_grad(&self, i: usize, q: usize) -> Result<Tensor1<D>> {
        self.check_ready(UpdateFlags::GRADIENTS, "gradients")?;
        self.check_indices(i, q)?;
        Ok(self.real_grads[i * self.quadrature.len() + q])
    }

    /// Jacobian determinant times quadrature weight at point `q`.
    #[inline]
    pub fn jxw(&self, q: usize) -> Result<f64> {
        self.check_ready(UpdateFlags::JXW, "JxW")?;
        if q >= self.quadrature.len() {
            return Err(Error::IndexError {
                index: q,
                limit: self.quadrature.len(),
            });
        }
        Ok(self.jxw[q])
    }

    /// Real-space location of quadrature point `q`.
    #[inline]
    pub fn quadrature_point(&self, q: usize) -> Result<Point<D>> {
        self.check_ready(UpdateFlags::QUADRATURE_POINTS, "quadrature points")?;
        if q >= self.quadrature.len() {
            return Err(Error::IndexError {
                index: q,
                limit: self.quadrature.len(),
            });
        }
        Ok(self.q_points[q])
    }

    /// The reference tables, exposed for cache-stability tests.
    pub fn reference_tables(&self) -> (&[f64], &[Tensor1<D>]) {
        (&self.ref_values, &self.ref_grads)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{hyper_cube, hyper_shell_2d};

    fn all_flags() -> UpdateFlags {
        UpdateFlags::VALUES | UpdateFlags::GRADIENTS | UpdateFlags::JXW
            | UpdateFlags::QUADRATURE_POINTS
    }

    #[test]
    fn jxw_sums_to_cell_volume() {
        let tri: Triangulation<2> = hyper_cube(0.0, 1.0, 1).unwrap();
        let cell = tri.active_cells().next().unwrap();
        let mut fev = FEValues::new(
            FiniteElementQ::new(1),
            MappingQ::new(1),
            Quadrature::gauss(2),
            all_flags(),
        );
        fev.reinit(&tri, cell).unwrap();
        let total: f64 = (0..fev.n_quadrature_points()).map(|q| fev.jxw(q).unwrap()).sum();
        assert!((total - 1.0).abs() < 1e-14);

        let tri: Triangulation<2> = hyper_cube(0.0, 0.5, 1).unwrap();
        let cell = tri.active_cells().next().unwrap();
        fev.reinit(&tri, cell).unwrap();
        let total: f64 = (0..fev.n_quadrature_points()).map(|q| fev.jxw(q).unwrap()).sum();
        assert!((total - 0.25).abs() < 1e-14);
    }

    #[test]
    fn jxw_sums_to_domain_measure_on_refined_meshes() {
        let mut tri: Triangulation<2> = hyper_cube(0.0, 2.0, 2).unwrap();
        let h = tri.active_cells().next().unwrap();
        tri.set_refine_flag(h).unwrap();
        tri.execute_refinement().unwrap();
        let mut fev = FEValues::new(
            FiniteElementQ::new(2),
            MappingQ::new(1),
            Quadrature::gauss(3),
            UpdateFlags::JXW,
        );
        let mut total = 0.0;
        for cell in tri.active_cells() {
            fev.reinit(&tri, cell).unwrap();
            total += (0..fev.n_quadrature_points())
                .map(|q| fev.jxw(q).unwrap())
                .sum::<f64>();
        }
        assert!((total - 4.0).abs() < 1e-10 * 4.0);
    }

    #[test]
    fn shell_area_converges_to_annulus() {
        let mut tri = hyper_shell_2d(Point::new([0.0, 0.0]), 0.5, 1.0, 6).unwrap();
        tri.refine_global(3).unwrap();
        let mut fev = FEValues::new(
            FiniteElementQ::new(1),
            MappingQ::new(2),
            Quadrature::gauss(3),
            UpdateFlags::JXW,
        );
        let mut total = 0.0;
        for cell in tri.active_cells() {
            fev.reinit(&tri, cell).unwrap();
            total += (0..fev.n_quadrature_points())
                .map(|q| fev.jxw(q).unwrap())
                .sum::<f64>();
        }
        let exact = std::f64::consts::PI * (1.0 - 0.25);
        assert!(
            ((total - exact) / exact).abs() < 5e-3,
            "area {total}, exact {exact}"
        );
    }

    #[test]
    fn gradients_scale_with_cell_size() {
        let tri: Triangulation<2> = hyper_cube(0.0, 0.5, 1).unwrap();
        let cell = tri.active_cells().next().unwrap();
        let fe = FiniteElementQ::new(1);
        let mut fev = FEValues::new(fe.clone(), MappingQ::new(1), Quadrature::gauss(2), all_flags());
        fev.reinit(&tri, cell).unwrap();
        for q in 0..fev.n_quadrature_points() {
            let x_hat = fev.quadrature().point(q);
            for i in 0..fe.dofs_per_cell() {
                let reference = fe.shape_grad(i, &x_hat).unwrap();
                let real = fev.shape_grad(i, q).unwrap();
                for d in 0..2 {
                    assert!((real[d] - reference[d] / 0.5).abs() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn gradient_partition_of_unity_integrates_to_zero() {
        let (tri, _) = {
            let mut tri: Triangulation<2> = hyper_cube(0.0, 1.0, 2).unwrap();
            let h = tri.active_cells().next().unwrap();
            tri.set_refine_flag(h).unwrap();
            tri.execute_refinement().unwrap();
            (tri, ())
        };
        let mut fev = FEValues::new(
            FiniteElementQ::new(3),
            MappingQ::new(1),
            Quadrature::gauss(4),
            UpdateFlags::GRADIENTS | UpdateFlags::JXW,
        );
        for cell in tri.active_cells() {
            fev.reinit(&tri, cell).unwrap();
            for q in 0..fev.n_quadrature_points() {
                let mut sum = Tensor1::zero();
                for i in 0..fev.dofs_per_cell() {
                    sum += fev.shape_grad(i, q).unwrap() * fev.jxw(q).unwrap();
                }
                assert!(sum.norm() < 1e-11);
            }
        }
    }

    #[test]
    fn affine_field_gradient_recovered_exactly() {
        // u(x) = 3 + 2x - 5y interpolated at element nodes; its discrete
        // gradient must equal (2, -5) at every quadrature point.
        let vertices = vec![
            Point::new([0.0, 0.0]),
            Point::new([1.0, 0.1]),
            Point::new([0.2, 1.0]),
            Point::new([1.3, 1.2]),
        ];
        let tri = Triangulation::from_cells(vertices, &[vec![0, 1, 2, 3]]).unwrap();
        let cell = tri.active_cells().next().unwrap();
        let u = |p: Point<2>| 3.0 + 2.0 * p[0] - 5.0 * p[1];
        for degree in 1..=3 {
            let fe = FiniteElementQ::new(degree);
            let mapping = MappingQ::new(1);
            let mut fev = FEValues::new(fe.clone(), mapping.clone(), Quadrature::gauss(degree + 1), all_flags());
            fev.reinit(&tri, cell).unwrap();
            let nodal: Vec<f64> = (0..fe.dofs_per_cell())
                .map(|i| {
                    let x = mapping
                        .transform_unit_to_real(&tri, cell, &fe.node(i))
                        .unwrap();
                    u(x)
                })
                .collect();
            for q in 0..fev.n_quadrature_points() {
                let mut g = Tensor1::zero();
                for (i, &ui) in nodal.iter().enumerate() {
                    g += fev.shape_grad(i, q).unwrap() * ui;
                }
                assert!((g[0] - 2.0).abs() < 1e-11, "got {g:?}");
                assert!((g[1] + 5.0).abs() < 1e-11);
            }
        }
    }

    #[test]
    fn reference_tables_stable_across_reinit() {
        let tri: Triangulation<2> = hyper_cube(0.0, 1.0, 2).unwrap();
        let mut fev = FEValues::new(
            FiniteElementQ::new(2),
            MappingQ::new(2),
            Quadrature::gauss(3),
            all_flags(),
        );
        let (v0, g0) = {
            let (v, g) = fev.reference_tables();
            (v.to_vec(), g.to_vec())
        };
        for cell in tri.active_cells().collect::<Vec<_>>() {
            fev.reinit(&tri, cell).unwrap();
        }
        let (v1, g1) = fev.reference_tables();
        assert!(v0.iter().zip(v1).all(|(a, b)| a.to_bits() == b.to_bits()));
        assert!(g0
            .iter()
            .zip(g1)
            .all(|(a, b)| (0..2).all(|d| a[d].to_bits() == b[d].to_bits())));
    }

    #[test]
    fn missing_flags_and_uninitialized_access_error() {
        let tri: Triangulation<2> = hyper_cube(0.0, 1.0, 1).unwrap();
        let cell = tri.active_cells().next().unwrap();
        let mut fev = FEValues::new(
            FiniteElementQ::new(1),
            MappingQ::new(1),
            Quadrature::gauss(2),
            UpdateFlags::JXW,
        );
        assert!(matches!(fev.jxw(0), Err(Error::NotInitialized)));
        fev.reinit(&tri, cell).unwrap();
        assert!(fev.jxw(0).is_ok());
        assert!(matches!(
            fev.shape_grad(0, 0),
            Err(Error::UpdateFlagMissing("gradients"))
        ));
        assert!(matches!(
            fev.jxw(99),
            Err(Error::IndexError { index: 99, limit: 4 })
        ));
    }

    #[test]
    fn quadrature_points_mapped_to_real_space() {
        let tri: Triangulation<2> = hyper_cube(2.0, 4.0, 1).unwrap();
        let cell = tri.active_cells().next().unwrap();
        let mut fev = FEValues::new(
            FiniteElementQ::new(1),
            MappingQ::new(1),
            Quadrature::gauss(1),
            UpdateFlags::QUADRATURE_POINTS,
        );
        fev.reinit(&tri, cell).unwrap();
        let p = fev.quadrature_point(0).unwrap();
        assert!(p.distance(&Point::new([3.0, 3.0])) < 1e-14);
    }
}
