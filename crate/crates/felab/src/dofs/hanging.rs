//! Hanging-node constraints across faces with coarser neighbors.
//!
//! On a 2:1-balanced mesh every nonconforming face pairs one coarse cell
//! with the children of its former neighbor. Continuity requires each
//! fine-side node value to equal the coarse-side trace evaluated at the
//! node's location, which is exactly an affine constraint with coarse shape
//! function values as coefficients.

use std::collections::HashSet;

use crate::dofs::constraints::AffineConstraints;
use crate::dofs::handler::{local_face_dofs, DoFHandler};
use crate::error::Result;
use crate::fe::FiniteElementQ;
use crate::mesh::{face_corners, CellHandle, NeighborInfo, Triangulation};

/// Builds the closed constraint set for all hanging DoFs of the active mesh.
pub fn make_hanging_node_constraints<const D: usize>(
    tri: &Triangulation<D>,
    dh: &DoFHandler<D>,
) -> Result<AffineConstraints> {
    let fe = FiniteElementQ::<D>::new(dh.degree());
    let nodes = fe.nodes_1d().to_vec();
    let mut constraints = AffineConstraints::new();

    for cell in tri.active_cells() {
        for f in 0..2 * D {
            let NeighborInfo::Coarser {
                cell: coarse,
                subface,
            } = tri.neighbor(cell, f)
            else {
                continue;
            };
            debug_assert_eq!(coarse.level + 1, cell.level, "mesh is not 2:1 balanced");

            // the coarse cell's face towards us is the one whose same-level
            // neighbor is our parent
            let parent = tri.parent(cell).expect("refined cell has a parent");
            let g = (0..2 * D)
                .find(|&g| matches!(tri.neighbor(coarse, g), NeighborInfo::SameLevel(c) if c == parent))
                .expect("coarser neighbor must face the parent cell");

            let fine_dofs = dh.cell_dof_indices(cell)?;
            let coarse_dofs = dh.cell_dof_indices(coarse)?;
            let fine_locals = local_face_dofs(&fe, f);
            let coarse_locals = local_face_dofs(&fe, g);
            let coarse_set: HashSet<usize> =
                coarse_locals.iter().map(|&l| coarse_dofs[l]).collect();

            match D {
                2 => constrain_face_2d(
                    tri,
                    &fe,
                    &nodes,
                    cell,
                    coarse,
                    f,
                    g,
                    fine_dofs,
                    coarse_dofs,
                    &fine_locals,
                    &coarse_locals,
                    &coarse_set,
                    &mut constraints,
                ),
                3 => constrain_face_3d(
                    &fe,
                    &nodes,
                    f,
                    subface,
                    fine_dofs,
                    coarse_dofs,
                    &fine_locals,
                    &coarse_locals,
                    &coarse_set,
                    &mut constraints,
                ),
                _ => unreachable!("meshes are two- or three-dimensional"),
            }
        }
    }

    constraints.close();
    Ok(constraints)
}

/// 2d case. Neighboring cells may be rotated relative to each other, so the
/// coarse face parameter of a fine node is found through vertex identities:
/// exactly one endpoint of the fine face coincides with an endpoint of the
/// coarse face, which fixes both the covered half and the direction.
#[allow(clippy::too_many_arguments)]
fn constrain_face_2d<const D: usize>(
    tri: &Triangulation<D>,
    fe: &FiniteElementQ<D>,
    nodes: &[f64],
    cell: CellHandle,
    coarse: CellHandle,
    f: usize,
    g: usize,
    fine_dofs: &[usize],
    coarse_dofs: &[usize],
    fine_locals: &[usize],
    coarse_locals: &[usize],
    coarse_set: &HashSet<usize>,
    constraints: &mut AffineConstraints,
) {
    let f_tan = 1 - f / 2;
    let g_tan = 1 - g / 2;
    let fc = face_corners::<2>(f);
    let gc = face_corners::<2>(g);
    let cv_fine = tri.cell_vertex_indices(cell);
    let cv_coarse = tri.cell_vertex_indices(coarse);
    let (fine_a, fine_b) = (cv_fine[fc[0]], cv_fine[fc[1]]);
    let (coarse_a, coarse_b) = (cv_coarse[gc[0]], cv_coarse[gc[1]]);

    // affine map t = c0 + c1 * x from fine face coordinate to coarse face
    // coordinate
    let (c0, c1) = if fine_a == coarse_a {
        (0.0, 0.5)
    } else if fine_b == coarse_a {
        (0.5, -0.5)
    } else if fine_a == coarse_b {
        (1.0, -0.5)
    } else if fine_b == coarse_b {
        (0.5, 0.5)
    } else {
        unreachable!("hanging face shares no endpoint with the coarse face")
    };

    for &lf in fine_locals {
        let gi = fine_dofs[lf];
        if coarse_set.contains(&gi) {
            continue;
        }
        let x = nodes[fe.tensor_index(lf)[f_tan]];
        let t = c0 + c1 * x;
        let entries: Vec<(usize, f64)> = coarse_locals
            .iter()
            .map(|&lc| {
                let m = fe.tensor_index(lc)[g_tan];
                (coarse_dofs[lc], fe.basis_1d().value(m, t))
            })
            .collect();
        constraints.add_constraint(gi, entries, 0.0);
    }
}

/// 3d case. Face orientations are identity-consistent by construction, so
/// the fine face covers the quadrant given by the subface bits and no
/// direction matching is necessary.
#[allow(clippy::too_many_arguments)]
fn constrain_face_3d<const D: usize>(
    fe: &FiniteElementQ<D>,
    nodes: &[f64],
    f: usize,
    subface: usize,
    fine_dofs: &[usize],
    coarse_dofs: &[usize],
    fine_locals: &[usize],
    coarse_locals: &[usize],
    coarse_set: &HashSet<usize>,
    constraints: &mut AffineConstraints,
) {
    let axis = f / 2;
    let tangents: Vec<usize> = (0..3).filter(|&a| a != axis).collect();
    let (t1, t2) = (tangents[0], tangents[1]);
    let b1 = (subface & 1) as f64;
    let b2 = ((subface >> 1) & 1) as f64;

    for &lf in fine_locals {
        let gi = fine_dofs[lf];
        if coarse_set.contains(&gi) {
            continue;
        }
        let ti = fe.tensor_index(lf);
        let s = (b1 + nodes[ti[t1]]) / 2.0;
        let u = (b2 + nodes[ti[t2]]) / 2.0;
        let entries: Vec<(usize, f64)> = coarse_locals
            .iter()
            .map(|&lc| {
                let tc = fe.tensor_index(lc);
                let coeff = fe.basis_1d().value(tc[t1], s) * fe.basis_1d().value(tc[t2], u);
                (coarse_dofs[lc], coeff)
            })
            .collect();
        constraints.add_constraint(gi, entries, 0.0);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point;
    use crate::mesh::hyper_cube;

    fn refined_square(refine: &[usize]) -> Triangulation<2> {
        let mut tri = hyper_cube::<2>(0.0, 1.0, 2).unwrap();
        for &i in refine {
            tri.set_refine_flag(CellHandle { level: 0, index: i }).unwrap();
        }
        tri.execute_refinement().unwrap();
        tri
    }

    fn distribute(tri: &Triangulation<2>, degree: usize) -> DoFHandler<2> {
        let fe = FiniteElementQ::<2>::new(degree);
        let mut dh = DoFHandler::new();
        dh.distribute_dofs(tri, &fe).unwrap();
        dh
    }

    fn find_dof_at<const D: usize>(dh: &DoFHandler<D>, p: &Point<D>) -> usize {
        let n = dh.n_dofs().unwrap();
        (0..n)
            .find(|&d| dh.support_point(d).unwrap().distance(p) < 1e-12)
            .unwrap_or_else(|| panic!("no dof at {p:?}"))
    }

    #[test]
    fn uniform_mesh_has_no_constraints() {
        let mut tri = hyper_cube::<2>(0.0, 1.0, 2).unwrap();
        tri.refine_global(1).unwrap();
        let dh = distribute(&tri, 2);
        let c = make_hanging_node_constraints(&tri, &dh).unwrap();
        assert_eq!(c.n_constraints(), 0);
    }

    #[test]
    fn q1_hanging_vertex_averages_endpoints() {
        let tri = refined_square(&[0]);
        let dh = distribute(&tri, 1);
        let c = make_hanging_node_constraints(&tri, &dh).unwrap();
        // hanging vertices sit at (0.5, 0.25) and (0.25, 0.5)
        assert_eq!(c.n_constraints(), 2);
        let hang = find_dof_at(&dh, &Point::new([0.5, 0.25]));
        let lo = find_dof_at(&dh, &Point::new([0.5, 0.0]));
        let hi = find_dof_at(&dh, &Point::new([0.5, 0.5]));
        let line = c.line(hang).unwrap();
        assert_eq!(line.entries.len(), 2);
        for &(d, w) in &line.entries {
            assert!(d == lo || d == hi);
            assert!((w - 0.5).abs() < 1e-14);
        }
    }

    #[test]
    fn q2_coefficients_at_quarter_point() {
        let tri = refined_square(&[0]);
        let dh = distribute(&tri, 2);
        let c = make_hanging_node_constraints(&tri, &dh).unwrap();

        // The fine node at (0.5, 0.125) sits at coarse face coordinate 1/4;
        // the quadratic coarse basis there evaluates to 0.375, 0.75, -0.125.
        let fine = find_dof_at(&dh, &Point::new([0.5, 0.125]));
        let d0 = find_dof_at(&dh, &Point::new([0.5, 0.0]));
        let d1 = find_dof_at(&dh, &Point::new([0.5, 0.25]));
        let d2 = find_dof_at(&dh, &Point::new([0.5, 0.5]));
        let line = c.line(fine).unwrap();
        let coeff = |d: usize| {
            line.entries
                .iter()
                .find(|&&(e, _)| e == d)
                .map(|&(_, w)| w)
                .unwrap()
        };
        assert!((coeff(d0) - 0.375).abs() < 1e-14);
        assert!((coeff(d1) - 0.75).abs() < 1e-14);
        assert!((coeff(d2) - (-0.125)).abs() < 1e-14);
    }

    #[test]
    fn polynomial_reproduction_2d() {
        // Interpolating a degree-p polynomial and distributing constraints
        // must reproduce it exactly at every support point.
        let mut tri = hyper_cube::<2>(0.0, 1.0, 2).unwrap();
        tri.set_refine_flag(CellHandle { level: 0, index: 0 }).unwrap();
        tri.set_refine_flag(CellHandle { level: 0, index: 3 }).unwrap();
        tri.execute_refinement().unwrap();
        for p in 1..=4usize {
            let dh = distribute(&tri, p);
            let c = make_hanging_node_constraints(&tri, &dh).unwrap();
            assert!(c.n_constraints() > 0);
            let poly = |pt: &Point<2>| (pt[0] + 0.7 * pt[1] + 0.3).powi(p as i32);
            let n = dh.n_dofs().unwrap();
            let mut x = vec![0.0; n];
            for d in 0..n {
                if !c.is_constrained(d) {
                    x[d] = poly(&dh.support_point(d).unwrap());
                }
            }
            c.distribute(&mut x);
            for d in 0..n {
                let expected = poly(&dh.support_point(d).unwrap());
                assert!(
                    (x[d] - expected).abs() < 1e-11,
                    "degree {p}, dof {d}: {} vs {expected}",
                    x[d]
                );
            }
        }
    }

    #[test]
    fn polynomial_reproduction_3d() {
        let mut tri = hyper_cube::<3>(0.0, 1.0, 2).unwrap();
        tri.set_refine_flag(CellHandle { level: 0, index: 0 }).unwrap();
        tri.execute_refinement().unwrap();
        for p in 1..=3usize {
            let fe = FiniteElementQ::<3>::new(p);
            let mut dh = DoFHandler::new();
            dh.distribute_dofs(&tri, &fe).unwrap();
            let c = make_hanging_node_constraints(&tri, &dh).unwrap();
            assert!(c.n_constraints() > 0);
            let poly = |pt: &Point<3>| {
                (pt[0] + 0.5 * pt[1] - 0.25 * pt[2] + 0.4).powi(p as i32)
            };
            let n = dh.n_dofs().unwrap();
            let mut x = vec![0.0; n];
            for d in 0..n {
                if !c.is_constrained(d) {
                    x[d] = poly(&dh.support_point(d).unwrap());
                }
            }
            c.distribute(&mut x);
            for d in 0..n {
                let expected = poly(&dh.support_point(d).unwrap());
                assert!(
                    (x[d] - expected).abs() < 1e-11,
                    "degree {p}, dof {d}: {} vs {expected}",
                    x[d]
                );
            }
        }
    }

    #[test]
    fn constraints_are_closed() {
        // two refinement levels to force chains through doubly hanging nodes
        let mut tri = hyper_cube::<2>(0.0, 1.0, 2).unwrap();
        tri.set_refine_flag(CellHandle { level: 0, index: 0 }).unwrap();
        tri.execute_refinement().unwrap();
        tri.set_refine_flag(CellHandle { level: 1, index: 0 }).unwrap();
        tri.execute_refinement().unwrap();
        for p in [1, 2] {
            let dh = distribute(&tri, p);
            let c = make_hanging_node_constraints(&tri, &dh).unwrap();
            assert!(c.is_closed());
            for (_, line) in c.iter() {
                for &(d, _) in &line.entries {
                    assert!(!c.is_constrained(d));
                }
            }
        }
    }

    #[test]
    fn rotated_coarse_neighbor_is_handled() {
        // rotated cell next to a refined one: the direction matching in the
        // 2d constraint builder must still reproduce linear functions
        let vertices = vec![
            Point::new([0.0, 0.0]),
            Point::new([1.0, 0.0]),
            Point::new([2.0, 0.0]),
            Point::new([0.0, 1.0]),
            Point::new([1.0, 1.0]),
            Point::new([2.0, 1.0]),
        ];
        let cells = vec![vec![0, 1, 3, 4], vec![5, 4, 2, 1]];
        let mut tri: Triangulation<2> = Triangulation::from_cells(vertices, &cells).unwrap();
        tri.set_refine_flag(CellHandle { level: 0, index: 0 }).unwrap();
        tri.execute_refinement().unwrap();

        for p in 1..=3usize {
            let dh = distribute(&tri, p);
            let c = make_hanging_node_constraints(&tri, &dh).unwrap();
            assert!(c.n_constraints() > 0);
            let poly = |pt: &Point<2>| (0.3 * pt[0] - 0.9 * pt[1] + 0.1).powi(p as i32);
            let n = dh.n_dofs().unwrap();
            let mut x = vec![0.0; n];
            for d in 0..n {
                if !c.is_constrained(d) {
                    x[d] = poly(&dh.support_point(d).unwrap());
                }
            }
            c.distribute(&mut x);
            for d in 0..n {
                let expected = poly(&dh.support_point(d).unwrap());
                assert!((x[d] - expected).abs() < 1e-11, "degree {p}, dof {d}");
            }
        }
    }
}
