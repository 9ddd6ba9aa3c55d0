use crate::geometry::{ManifoldId, Point};

use super::triangulation::{
    n_cell_faces, n_cell_vertices, CellHandle, NeighborInfo, Triangulation,
};

/// Read access to one cell of a [`Triangulation`].
///
/// Accessors are cheap handles; they stay valid as long as the mesh is not
/// refined.
#[derive(Clone, Copy)]
pub struct CellAccessor<'a, const D: usize> {
    tri: &'a Triangulation<D>,
    handle: CellHandle,
}

impl<'a, const D: usize> CellAccessor<'a, D> {
    pub fn new(tri: &'a Triangulation<D>, handle: CellHandle) -> Self {
        CellAccessor { tri, handle }
    }

    pub fn handle(&self) -> CellHandle {
        self.handle
    }

    pub fn level(&self) -> usize {
        self.handle.level
    }

    pub fn index(&self) -> usize {
        self.handle.index
    }

    pub fn n_vertices(&self) -> usize {
        n_cell_vertices(D)
    }

    pub fn n_faces(&self) -> usize {
        n_cell_faces(D)
    }

    pub fn is_active(&self) -> bool {
        self.tri.is_active(self.handle)
    }

    pub fn vertex_index(&self, i: usize) -> usize {
        self.tri.cell_vertex_indices(self.handle)[i]
    }

    pub fn vertex(&self, i: usize) -> Point<D> {
        self.tri.vertex(self.vertex_index(i))
    }

    /// Arithmetic mean of the cell corners.
    pub fn center(&self) -> Point<D> {
        let mut coords = [0.0; D];
        let n = self.n_vertices() as f64;
        for i in 0..self.n_vertices() {
            let v = self.vertex(i);
            for d in 0..D {
                coords[d] += v[d] / n;
            }
        }
        Point::new(coords)
    }

    pub fn face(&self, f: usize) -> FaceAccessor<'a, D> {
        FaceAccessor {
            tri: self.tri,
            index: self.tri.cell_face_indices(self.handle)[f],
        }
    }

    pub fn neighbor(&self, f: usize) -> NeighborInfo {
        self.tri.neighbor(self.handle, f)
    }

    pub fn at_boundary(&self, f: usize) -> bool {
        matches!(self.neighbor(f), NeighborInfo::Boundary)
    }

    pub fn parent(&self) -> Option<CellAccessor<'a, D>> {
        self.tri.parent(self.handle).map(|h| CellAccessor {
            tri: self.tri,
            handle: h,
        })
    }

    pub fn child(&self, k: usize) -> Option<CellAccessor<'a, D>> {
        self.tri.child(self.handle, k).map(|h| CellAccessor {
            tri: self.tri,
            handle: h,
        })
    }

    pub fn material_id(&self) -> u32 {
        self.tri.cell_material_id(self.handle)
    }

    pub fn manifold_id(&self) -> ManifoldId {
        self.tri.cell_manifold_id(self.handle)
    }
}

impl<const D: usize> std::fmt::Debug for CellAccessor<'_, D> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "CellAccessor({}, {})", self.handle.level, self.handle.index)
    }
}

/// Read access to one face, a (D-1)-dimensional mesh entity.
#[derive(Clone, Copy)]
pub struct FaceAccessor<'a, const D: usize> {
    tri: &'a Triangulation<D>,
    index: usize,
}

impl<const D: usize> FaceAccessor<'_, D> {
    pub fn index(&self) -> usize {
        self.index
    }

    pub fn vertex_indices(&self) -> &[usize] {
        self.tri.face_vertex_indices(self.index)
    }

    pub fn vertex(&self, i: usize) -> Point<D> {
        self.tri.vertex(self.vertex_indices()[i])
    }

    pub fn boundary_id(&self) -> Option<u32> {
        self.tri.face_boundary_id(self.index)
    }

    pub fn at_boundary(&self) -> bool {
        self.boundary_id().is_some()
    }

    pub fn manifold_id(&self) -> ManifoldId {
        self.tri.face_manifold_id(self.index)
    }

    pub fn center(&self) -> Point<D> {
        let ids = self.vertex_indices();
        let mut coords = [0.0; D];
        let n = ids.len() as f64;
        for &v in ids {
            let p = self.tri.vertex(v);
            for d in 0..D {
                coords[d] += p[d] / n;
            }
        }
        Point::new(coords)
    }
}

impl<const D: usize> std::fmt::Debug for FaceAccessor<'_, D> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "FaceAccessor({})", self.index)
    }
}

impl<const D: usize> Triangulation<D> {
    pub fn cell(&self, handle: CellHandle) -> CellAccessor<'_, D> {
        CellAccessor::new(self, handle)
    }

    /// Accessors for the active cells, in (level, index) order.
    pub fn active_cell_iterators(&self) -> impl Iterator<Item = CellAccessor<'_, D>> {
        self.active_cells().map(move |h| CellAccessor::new(self, h))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::hyper_cube;

    #[test]
    fn accessor_roundtrip() {
        let tri: Triangulation<2> = hyper_cube(0.0, 1.0, 2).unwrap();
        let cells: Vec<_> = tri.active_cell_iterators().collect();
        assert_eq!(cells.len(), 4);
        let c = cells[0];
        assert_eq!(c.level(), 0);
        assert_eq!(c.n_vertices(), 4);
        assert_eq!(c.n_faces(), 4);
        assert!(c.is_active());
        assert!(c.parent().is_none());
        assert!((c.center()[0] - 0.25).abs() < 1e-15);
        assert!(c.at_boundary(0));
        assert!(!c.at_boundary(1));
    }

    #[test]
    fn face_accessor_reports_boundary_ids() {
        let tri: Triangulation<2> = hyper_cube(0.0, 1.0, 2).unwrap();
        let c = tri.active_cell_iterators().next().unwrap();
        assert_eq!(c.face(0).boundary_id(), Some(0));
        assert_eq!(c.face(2).boundary_id(), Some(2));
        assert_eq!(c.face(1).boundary_id(), None);
        assert!((c.face(0).center()[0]).abs() < 1e-15);
    }

    #[test]
    fn iteration_after_refinement() {
        let mut tri: Triangulation<2> = hyper_cube(0.0, 1.0, 2).unwrap();
        let h = tri.active_cells().next().unwrap();
        tri.set_refine_flag(h).unwrap();
        tri.execute_refinement().unwrap();
        assert_eq!(tri.active_cell_iterators().count(), 7);
        let again: Vec<_> = tri.active_cell_iterators().map(|c| c.handle()).collect();
        let expect: Vec<_> = tri.active_cells().collect();
        assert_eq!(again, expect);
    }
}
