use crate::error::Result;
use crate::fe::Lagrange1d;
use crate::geometry::{Point, Tensor1, Tensor2};
use crate::mesh::{CellHandle, Triangulation};

/// Polynomial mapping of degree `m` from the reference cell to mesh cells.
///
/// Support points are placed through the triangulation's manifolds at the
/// tensor product of the `m+1` Gauss-Lobatto nodes, so curved boundaries
/// are approximated by polynomials interpolating the exact geometry. For
/// axis-aligned boxes without manifold influence the mapping degenerates to
/// a diagonal affine map, which [`CellMapping`] detects and shortcuts.
#[derive(Clone, Debug)]
pub struct MappingQ<const D: usize> {
    degree: usize,
    basis: Lagrange1d,
}

impl<const D: usize> MappingQ<D> {
    pub fn new(degree: usize) -> Self {
        assert!(degree >= 1, "mapping degree must be at least 1");
        MappingQ {
            degree,
            basis: Lagrange1d::on_lobatto(degree),
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn basis_1d(&self) -> &Lagrange1d {
        &self.basis
    }

    pub fn n_support_points(&self) -> usize {
        (self.degree + 1).pow(D as u32)
    }

    fn tensor_index(&self, k: usize) -> [usize; D] {
        let n = self.degree + 1;
        let mut idx = [0; D];
        let mut rest = k;
        for i in idx.iter_mut() {
            *i = rest % n;
            rest /= n;
        }
        idx
    }

    /// Reference-cell location of support point `k`.
    pub fn reference_support_point(&self, k: usize) -> Point<D> {
        let idx = self.tensor_index(k);
        let mut coords = [0.0; D];
        for d in 0..D {
            coords[d] = self.basis.nodes()[idx[d]];
        }
        Point::new(coords)
    }

    /// Value of mapping shape function `k` at `x_hat`.
    pub fn shape_value(&self, k: usize, x_hat: &Point<D>) -> f64 {
        let idx = self.tensor_index(k);
        let mut acc = 1.0;
        for d in 0..D {
            acc *= self.basis.value(idx[d], x_hat[d]);
        }
        acc
    }

    /// Reference gradient of mapping shape function `k` at `x_hat`.
    pub fn shape_grad(&self, k: usize, x_hat: &Point<D>) -> Tensor1<D> {
        let idx = self.tensor_index(k);
        let mut values = [0.0; D];
        let mut derivs = [0.0; D];
        for d in 0..D {
            values[d] = self.basis.value(idx[d], x_hat[d]);
            derivs[d] = self.basis.derivative(idx[d], x_hat[d]);
        }
        let mut grad = [0.0; D];
        for (d, g) in grad.iter_mut().enumerate() {
            let mut acc = 1.0;
            for k in 0..D {
                acc *= if k == d { derivs[k] } else { values[k] };
            }
            *g = acc;
        }
        Tensor1::new(grad)
    }

    /// Assembles the per-cell mapping data for `cell`.
    pub fn cell_mapping(
        &self,
        tri: &Triangulation<D>,
        cell: CellHandle,
    ) -> Result<CellMapping<D>> {
        if tri.cell_is_straight(cell) {
            if let Some((origin, extents)) = detect_box(tri, cell) {
                return Ok(CellMapping::Cartesian { origin, extents });
            }
        }
        let mut support_points = Vec::with_capacity(self.n_support_points());
        for k in 0..self.n_support_points() {
            support_points.push(tri.cell_point(cell, self.reference_support_point(k))?);
        }
        Ok(CellMapping::General { support_points })
    }

    /// Maps a reference point to real space on `cell`.
    pub fn transform_unit_to_real(
        &self,
        tri: &Triangulation<D>,
        cell: CellHandle,
        x_hat: &Point<D>,
    ) -> Result<Point<D>> {
        Ok(self.cell_mapping(tri, cell)?.transform(self, x_hat))
    }

    /// Jacobian of the mapping at `x_hat` on `cell`.
    pub fn jacobian(
        &self,
        tri: &Triangulation<D>,
        cell: CellHandle,
        x_hat: &Point<D>,
    ) -> Result<Tensor2<D>> {
        Ok(self.cell_mapping(tri, cell)?.jacobian(self, x_hat))
    }
}

/// Checks whether the cell's vertices form an axis-aligned box spanned by
/// vertex 0 and the last vertex; comparisons are exact, so sheared cells or
/// rounding victims fall back to the general path.
fn detect_box<const D: usize>(
    tri: &Triangulation<D>,
    cell: CellHandle,
) -> Option<(Point<D>, [f64; D])> {
    let verts = tri.cell_vertex_indices(cell);
    let lo = tri.vertex(verts[0]);
    let hi = tri.vertex(verts[verts.len() - 1]);
    for (k, &v) in verts.iter().enumerate() {
        let p = tri.vertex(v);
        for d in 0..D {
            let expect = if (k >> d) & 1 == 1 { hi[d] } else { lo[d] };
            if p[d] != expect {
                return None;
            }
        }
    }
    let mut extents = [0.0; D];
    for d in 0..D {
        extents[d] = hi[d] - lo[d];
        if extents[d] <= 0.0 {
            return None;
        }
    }
    Some((lo, extents))
}

/// Geometry of one mapped cell, either the diagonal fast path or the full
/// polynomial map through its support points.
#[derive(Clone, Debug)]
pub enum CellMapping<const D: usize> {
    Cartesian { origin: Point<D>, extents: [f64; D] },
    General { support_points: Vec<Point<D>> },
}

impl<const D: usize> CellMapping<D> {
    pub fn is_cartesian(&self) -> bool {
        matches!(self, CellMapping::Cartesian { .. })
    }

    pub fn transform(&self, mapping: &MappingQ<D>, x_hat: &Point<D>) -> Point<D> {
        match self {
            CellMapping::Cartesian { origin, extents } => {
                let mut coords = [0.0; D];
                for d in 0..D {
                    coords[d] = origin[d] + extents[d] * x_hat[d];
                }
                Point::new(coords)
            }
            CellMapping::General { support_points } => {
                let mut coords = [0.0; D];
                for (k, sp) in support_points.iter().enumerate() {
                    let psi = mapping.shape_value(k, x_hat);
                    for d in 0..D {
                        coords[d] += psi * sp[d];
                    }
                }
                Point::new(coords)
            }
        }
    }

    pub fn jacobian(&self, mapping: &MappingQ<D>, x_hat: &Point<D>) -> Tensor2<D> {
        match self {
            CellMapping::Cartesian { extents, .. } => Tensor2::from_diagonal(*extents),
            CellMapping::General { support_points } => {
                let mut j = Tensor2::zero();
                for (k, sp) in support_points.iter().enumerate() {
                    let grad = mapping.shape_grad(k, x_hat);
                    for r in 0..D {
                        for c in 0..D {
                            j.0[r][c] += sp[r] * grad[c];
                        }
                    }
                }
                j
            }
        }
    }
}
