use crate::error::{Error, Result};
use crate::geometry::{ManifoldId, Point};

use super::triangulation::{CellHandle, Triangulation};

/// Polar manifold id used by [`hyper_shell_2d`] for the circular boundaries.
pub const SHELL_POLAR_ID: ManifoldId = ManifoldId(1);
/// Transfinite manifold id used by [`hyper_shell_2d`] for the cell interiors.
pub const SHELL_TRANSFINITE_ID: ManifoldId = ManifoldId(2);

/// Uniform `subdivisions^D` grid on `[lower, upper]^D`.
///
/// Boundary ids follow the face numbering: 0 at x = lower, 1 at x = upper,
/// then 2, 3 for y and 4, 5 for z.
pub fn hyper_cube<const D: usize>(
    lower: f64,
    upper: f64,
    subdivisions: usize,
) -> Result<Triangulation<D>> {
    if lower >= upper {
        return Err(Error::BadDomain(format!(
            "hyper_cube needs lower < upper, got [{lower}, {upper}]"
        )));
    }
    if subdivisions == 0 {
        return Err(Error::BadDomain("subdivisions must be at least 1".into()));
    }
    let n = subdivisions;
    let n_vertices_1d = n + 1;
    let h = (upper - lower) / n as f64;

    let n_total_vertices = n_vertices_1d.pow(D as u32);
    let mut vertices = Vec::with_capacity(n_total_vertices);
    for flat in 0..n_total_vertices {
        let mut coords = [0.0; D];
        let mut rest = flat;
        for c in coords.iter_mut() {
            *c = lower + (rest % n_vertices_1d) as f64 * h;
            rest /= n_vertices_1d;
        }
        vertices.push(Point::new(coords));
    }

    let n_cells = n.pow(D as u32);
    let mut cells = Vec::with_capacity(n_cells);
    for flat in 0..n_cells {
        let mut cell_origin = [0usize; D];
        let mut rest = flat;
        for c in cell_origin.iter_mut() {
            *c = rest % n;
            rest /= n;
        }
        let mut cell = Vec::with_capacity(1 << D);
        for k in 0..(1usize << D) {
            let mut v = 0;
            let mut stride = 1;
            for d in 0..D {
                v += (cell_origin[d] + ((k >> d) & 1)) * stride;
                stride *= n_vertices_1d;
            }
            cell.push(v);
        }
        cells.push(cell);
    }

    let mut tri = Triangulation::from_cells(vertices, &cells)?;
    for handle in tri.active_cells().collect::<Vec<_>>() {
        for f in 0..2 * D {
            if tri.face_boundary_id(tri.cell_face_indices(handle)[f]).is_some() {
                tri.set_boundary_id(handle, f, f as u32);
            }
        }
    }
    Ok(tri)
}

/// Annulus around `center` of `n_cells` coarse quadrilaterals.
///
/// The first reference direction is radial, the second angular, so face 0 of
/// every cell lies on the inner circle (boundary id 0) and face 1 on the
/// outer circle (boundary id 1). Both circles carry a polar manifold and the
/// cell interiors a transfinite chart, so refinement keeps boundary vertices
/// at the exact radii while interior cells deform smoothly between them.
pub fn hyper_shell_2d(
    center: Point<2>,
    r_inner: f64,
    r_outer: f64,
    n_cells: usize,
) -> Result<Triangulation<2>> {
    if !(r_inner > 0.0 && r_inner < r_outer) {
        return Err(Error::BadDomain(format!(
            "hyper_shell_2d needs 0 < r_inner < r_outer, got ({r_inner}, {r_outer})"
        )));
    }
    if n_cells < 3 {
        return Err(Error::BadDomain(format!(
            "hyper_shell_2d needs at least 3 cells, got {n_cells}"
        )));
    }

    let mut vertices = Vec::with_capacity(2 * n_cells);
    for k in 0..n_cells {
        let theta = 2.0 * std::f64::consts::PI * k as f64 / n_cells as f64;
        let dir = [theta.cos(), theta.sin()];
        vertices.push(Point::new([
            center[0] + r_inner * dir[0],
            center[1] + r_inner * dir[1],
        ]));
        vertices.push(Point::new([
            center[0] + r_outer * dir[0],
            center[1] + r_outer * dir[1],
        ]));
    }

    let mut cells = Vec::with_capacity(n_cells);
    for k in 0..n_cells {
        let next = (k + 1) % n_cells;
        cells.push(vec![2 * k, 2 * k + 1, 2 * next, 2 * next + 1]);
    }

    let mut tri = Triangulation::from_cells(vertices, &cells)?;
    tri.set_polar_manifold(SHELL_POLAR_ID.0, center)?;
    for index in 0..n_cells {
        let handle = CellHandle { level: 0, index };
        tri.set_boundary_id(handle, 0, 0);
        tri.set_boundary_id(handle, 1, 1);
        tri.set_face_manifold_id(handle, 0, SHELL_POLAR_ID);
        tri.set_face_manifold_id(handle, 1, SHELL_POLAR_ID);
        tri.set_cell_manifold_id(handle, SHELL_TRANSFINITE_ID);
    }
    tri.set_transfinite_manifold(SHELL_TRANSFINITE_ID.0)?;
    Ok(tri)
}
