//! Dirichlet boundary values as inhomogeneous constraints.

use crate::dofs::constraints::AffineConstraints;
use crate::dofs::function::ScalarFunction;
use crate::dofs::handler::{local_face_dofs, DoFHandler};
use crate::error::Result;
use crate::fe::FiniteElementQ;
use crate::mesh::Triangulation;

/// Pins every DoF whose support point lies on a face with the given boundary
/// id to the value of `g` at that point. The constraints are added to `out`
/// with first-wins semantics, so existing lines (e.g. hanging nodes) keep
/// priority.
pub fn interpolate_boundary_values<const D: usize>(
    tri: &Triangulation<D>,
    dh: &DoFHandler<D>,
    boundary_id: u32,
    g: &dyn ScalarFunction<D>,
    out: &mut AffineConstraints,
) -> Result<()> {
    let fe = FiniteElementQ::<D>::new(dh.degree());
    for &cell in dh.cells()? {
        let faces = tri.cell_face_indices(cell);
        let dofs = dh.cell_dof_indices(cell)?;
        for f in 0..2 * D {
            if tri.face_boundary_id(faces[f]) != Some(boundary_id) {
                continue;
            }
            for &local in &local_face_dofs(&fe, f) {
                let dof = dofs[local];
                let value = g.value(&dh.support_point(dof)?);
                out.add_boundary_value(dof, value);
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dofs::function::ConstantFunction;
    use crate::geometry::Point;
    use crate::mesh::{hyper_cube, hyper_shell_2d};

    fn square_handler(degree: usize) -> (Triangulation<2>, DoFHandler<2>) {
        let tri = hyper_cube::<2>(0.0, 1.0, 2).unwrap();
        let fe = FiniteElementQ::<2>::new(degree);
        let mut dh = DoFHandler::new();
        dh.distribute_dofs(&tri, &fe).unwrap();
        (tri, dh)
    }

    #[test]
    fn homogeneous_boundary_on_unit_square() {
        let (tri, dh) = square_handler(1);
        let mut c = AffineConstraints::new();
        for id in 0..4 {
            interpolate_boundary_values(&tri, &dh, id, &ConstantFunction(0.0), &mut c).unwrap();
        }
        c.close();
        // 8 of the 9 Q1 dofs sit on the boundary
        assert_eq!(c.n_constraints(), 8);
        let n = dh.n_dofs().unwrap();
        let free: Vec<usize> = (0..n).filter(|&d| !c.is_constrained(d)).collect();
        assert_eq!(free.len(), 1);
        let p = dh.support_point(free[0]).unwrap();
        assert!(p.distance(&Point::new([0.5, 0.5])) < 1e-14);
    }

    #[test]
    fn linear_data_pins_corner() {
        let (tri, dh) = square_handler(1);
        let g = |p: &Point<2>| p[0] + p[1];
        let mut c = AffineConstraints::new();
        for id in 0..4 {
            interpolate_boundary_values(&tri, &dh, id, &g, &mut c).unwrap();
        }
        c.close();
        let corner = (0..dh.n_dofs().unwrap())
            .find(|&d| dh.support_point(d).unwrap().distance(&Point::new([1.0, 1.0])) < 1e-14)
            .unwrap();
        let line = c.line(corner).unwrap();
        assert!(line.entries.is_empty());
        assert!((line.inhomogeneity - 2.0).abs() < 1e-14);
    }

    #[test]
    fn single_id_constrains_only_that_side() {
        // boundary id 2 is the y = 0 side
        let (tri, dh) = square_handler(2);
        let g = |p: &Point<2>| (std::f64::consts::PI * p[0]).sin();
        let mut c = AffineConstraints::new();
        interpolate_boundary_values(&tri, &dh, 2, &g, &mut c).unwrap();
        c.close();
        assert_eq!(c.n_constraints(), 5);
        for (dof, line) in c.iter() {
            let p = dh.support_point(dof).unwrap();
            assert_eq!(p[1], 0.0);
            assert!((line.inhomogeneity - (std::f64::consts::PI * p[0]).sin()).abs() < 1e-14);
        }
    }

    #[test]
    fn hanging_constraints_keep_priority() {
        use crate::dofs::hanging::make_hanging_node_constraints;
        use crate::mesh::CellHandle;

        let mut tri = hyper_cube::<2>(0.0, 1.0, 2).unwrap();
        tri.set_refine_flag(CellHandle { level: 0, index: 0 }).unwrap();
        tri.execute_refinement().unwrap();
        let fe = FiniteElementQ::<2>::new(1);
        let mut dh = DoFHandler::new();
        dh.distribute_dofs(&tri, &fe).unwrap();

        let c = make_hanging_node_constraints(&tri, &dh).unwrap();
        let n_hanging = c.n_constraints();
        let mut merged = AffineConstraints::new();
        merged.merge(&c);
        for id in 0..4 {
            interpolate_boundary_values(&tri, &dh, id, &ConstantFunction(1.0), &mut merged)
                .unwrap();
        }
        // before closing, the hanging lines survived the merge verbatim
        for (dof, line) in c.iter() {
            assert_eq!(merged.line(dof).unwrap(), line);
        }
        merged.close();
        assert!(merged.n_constraints() > n_hanging);

        // after closing, a hanging vertex averages its masters, one of which
        // is now a pinned boundary value
        let mut x = vec![0.0; dh.n_dofs().unwrap()];
        merged.distribute(&mut x);
        let at = |p: [f64; 2]| {
            (0..x.len())
                .find(|&d| dh.support_point(d).unwrap().distance(&Point::new(p)) < 1e-12)
                .unwrap()
        };
        assert_eq!(x[at([0.5, 0.0])], 1.0);
        assert_eq!(x[at([0.5, 0.5])], 0.0);
        assert_eq!(x[at([0.5, 0.25])], 0.5);
    }

    #[test]
    fn curved_boundary_support_points_sit_on_the_circle() {
        let mut tri = hyper_shell_2d(Point::new([0.0, 0.0]), 1.0, 2.0, 6).unwrap();
        tri.refine_global(1).unwrap();
        let fe = FiniteElementQ::<2>::new(2);
        let mut dh = DoFHandler::new();
        dh.distribute_dofs(&tri, &fe).unwrap();
        let mut c = AffineConstraints::new();
        interpolate_boundary_values(&tri, &dh, 0, &ConstantFunction(0.0), &mut c).unwrap();
        c.close();
        assert!(c.n_constraints() >= 24);
        for (dof, _) in c.iter() {
            let p = dh.support_point(dof).unwrap();
            assert!((p.norm() - 1.0).abs() < 1e-12, "support point {p:?} off the circle");
        }
    }
}
