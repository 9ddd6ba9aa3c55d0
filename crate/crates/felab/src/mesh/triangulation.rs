use std::collections::{BTreeSet, HashMap};

use crate::error::{Error, Result};
use crate::geometry::{EdgeCurve, Manifold, ManifoldId, Point, TransfiniteChart};

/// Sentinel for absent indices in the level arrays.
pub(crate) const INVALID: usize = usize::MAX;
/// Boundary-id sentinel marking interior faces.
pub(crate) const INTERIOR: u32 = u32::MAX;

/// Identifies a cell by refinement level and index within that level.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CellHandle {
    pub level: usize,
    pub index: usize,
}

/// What lies on the other side of a cell face.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NeighborInfo {
    /// The face is on the domain boundary.
    Boundary,
    /// A cell of the same refinement level shares the whole face. The
    /// neighbor may itself be refined; its children then subdivide the face.
    SameLevel(CellHandle),
    /// The neighbor is one level coarser; this cell's face covers the given
    /// subface of the neighbor's face.
    Coarser { cell: CellHandle, subface: usize },
}

/// Bookkeeping returned by [`Triangulation::execute_refinement`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RefinementReport {
    pub n_new_cells: usize,
    /// Cells flagged transitively to keep the 2:1 face balance.
    pub n_flag_additions_for_balance: usize,
}

/// Cells of one refinement level, stored as parallel arrays rather than an
/// array of cell structs for better cache locality during sweeps.
#[derive(Debug, Default)]
pub(crate) struct Level {
    /// Vertex indices, `2^D` per cell, lexicographic reference order.
    pub cell_vertices: Vec<usize>,
    /// Index of the parent on the previous level, `INVALID` on level 0.
    pub parent: Vec<usize>,
    /// First of the contiguous `2^D` children on the next level.
    pub children_start: Vec<usize>,
    pub active: Vec<bool>,
    pub material: Vec<u32>,
    pub manifold: Vec<ManifoldId>,
    pub refine: Vec<bool>,
    /// Face object indices, `2D` per cell in (x-,x+,y-,y+,z-,z+) order.
    pub faces: Vec<usize>,
    /// Same-level neighbor per face slot, `INVALID` when absent.
    pub neighbors: Vec<usize>,
}

impl Level {
    fn n_cells(&self) -> usize {
        self.active.len()
    }
}

/// Shared face objects ((D-1)-dimensional entities) across all levels.
#[derive(Debug, Default)]
pub(crate) struct FaceStore {
    /// Vertex indices, `2^(D-1)` per face, in creation order.
    pub vertices: Vec<usize>,
    /// `INTERIOR` sentinel for faces between two cells.
    pub boundary_id: Vec<u32>,
    pub manifold: Vec<ManifoldId>,
}

/// Hierarchical quadrilateral (`D = 2`) or hexahedral (`D = 3`) mesh.
///
/// Refinement is isotropic: a flagged cell is replaced by `2^D` children,
/// with transitive flagging keeping active neighbors within one level of
/// each other across every face. New vertices are placed through manifold
/// objects, so curved boundaries stay curved under refinement.
#[derive(Debug)]
pub struct Triangulation<const D: usize> {
    vertices: Vec<Point<D>>,
    levels: Vec<Level>,
    faces: FaceStore,
    /// Sorted vertex tuple of a face to its face object.
    face_lookup: HashMap<Vec<usize>, usize>,
    /// Sorted endpoint pair to the midpoint vertex created between them.
    edge_midpoints: HashMap<(usize, usize), usize>,
    /// Sorted quad corners to the center vertex created for them (3d).
    face_centers: HashMap<[usize; 4], usize>,
    manifolds: HashMap<u32, Box<dyn Manifold<D>>>,
    /// Centers of registered polar manifolds, needed to build chart edges.
    polar_centers: HashMap<u32, Point<D>>,
    transfinite_ids: BTreeSet<u32>,
    /// Transfinite chart per level-0 cell.
    charts: HashMap<usize, TransfiniteChart>,
}

pub(crate) const fn n_cell_vertices(d: usize) -> usize {
    1 << d
}

pub(crate) const fn n_cell_faces(d: usize) -> usize {
    2 * d
}

pub(crate) const fn n_face_vertices(d: usize) -> usize {
    1 << (d - 1)
}

/// Cell-local corner indices of face `f`, ascending. For face axis `a` and
/// side `s` these are the corners `k` with bit `a` of `k` equal to `s`.
pub(crate) fn face_corners<const D: usize>(f: usize) -> Vec<usize> {
    let (axis, side) = (f / 2, f % 2);
    (0..n_cell_vertices(D))
        .filter(|k| (k >> axis) & 1 == side)
        .collect()
}

/// Subface index of child `child` (lexicographic position in the parent)
/// on parent face `f`: the child's position bits on the in-face axes.
pub(crate) fn subface_of_child<const D: usize>(child: usize, f: usize) -> usize {
    let axis = f / 2;
    let mut sub = 0;
    let mut bit = 0;
    for d in 0..D {
        if d != axis {
            sub |= ((child >> d) & 1) << bit;
            bit += 1;
        }
    }
    sub
}

/// Whether child `child` touches parent face `f`.
pub(crate) fn child_on_face(child: usize, f: usize) -> bool {
    let (axis, side) = (f / 2, f % 2);
    (child >> axis) & 1 == side
}

fn sorted_key(v: &[usize]) -> Vec<usize> {
    let mut key = v.to_vec();
    key.sort_unstable();
    key
}

fn point2_to_d<const D: usize>(p: Point<2>) -> Point<D> {
    debug_assert_eq!(D, 2);
    let mut coords = [0.0; D];
    for (d, c) in coords.iter_mut().enumerate() {
        *c = p[d];
    }
    Point::new(coords)
}

fn point_d_to_2<const D: usize>(p: Point<D>) -> Point<2> {
    debug_assert_eq!(D, 2);
    Point::new([p[0], p[1]])
}

impl<const D: usize> Triangulation<D> {
    /// Builds a one-level mesh from explicit vertices and cells.
    ///
    /// Cell vertex lists use lexicographic reference order and must describe
    /// positively oriented cells. In 3d, the two cells meeting at a face must
    /// list its vertices in the same order; meshes produced by the generators
    /// here satisfy that by construction.
    pub fn from_cells(vertices: Vec<Point<D>>, cells: &[Vec<usize>]) -> Result<Self> {
        assert!(D == 2 || D == 3, "only 2d and 3d meshes are supported");
        let nv = n_cell_vertices(D);
        let nf = n_cell_faces(D);
        if cells.is_empty() {
            return Err(Error::InvalidMesh("mesh has no cells".into()));
        }

        let mut level = Level::default();
        for (ci, cell) in cells.iter().enumerate() {
            if cell.len() != nv {
                return Err(Error::InvalidMesh(format!(
                    "cell {ci} has {} vertices, expected {nv}",
                    cell.len()
                )));
            }
            for &v in cell {
                if v >= vertices.len() {
                    return Err(Error::InvalidMesh(format!(
                        "cell {ci} references vertex {v} of {}",
                        vertices.len()
                    )));
                }
            }
            let p: Vec<Point<D>> = cell.iter().map(|&v| vertices[v]).collect();
            let det = match D {
                2 => {
                    let (e1, e2) = (p[1] - p[0], p[2] - p[0]);
                    e1[0] * e2[1] - e1[1] * e2[0]
                }
                _ => {
                    let (e1, e2, e3) = (p[1] - p[0], p[2] - p[0], p[4] - p[0]);
                    e1[0] * (e2[1] * e3[2] - e2[2] * e3[1])
                        - e1[1] * (e2[0] * e3[2] - e2[2] * e3[0])
                        + e1[2] * (e2[0] * e3[1] - e2[1] * e3[0])
                }
            };
            if det <= 0.0 {
                return Err(Error::InvalidMesh(format!(
                    "cell {ci} is not positively oriented (corner determinant {det:.3e})"
                )));
            }
            level.cell_vertices.extend_from_slice(cell);
            level.parent.push(INVALID);
            level.children_start.push(INVALID);
            level.active.push(true);
            level.material.push(0);
            level.manifold.push(ManifoldId::FLAT);
            level.refine.push(false);
            level.faces.extend(std::iter::repeat(INVALID).take(nf));
            level.neighbors.extend(std::iter::repeat(INVALID).take(nf));
        }

        let mut tri = Triangulation {
            vertices,
            levels: vec![level],
            faces: FaceStore::default(),
            face_lookup: HashMap::new(),
            edge_midpoints: HashMap::new(),
            face_centers: HashMap::new(),
            manifolds: HashMap::new(),
            polar_centers: HashMap::new(),
            transfinite_ids: BTreeSet::new(),
            charts: HashMap::new(),
        };

        for ci in 0..cells.len() {
            for f in 0..nf {
                let local: Vec<usize> = face_corners::<D>(f)
                    .iter()
                    .map(|&k| tri.levels[0].cell_vertices[ci * nv + k])
                    .collect();
                let fid = tri.find_or_create_face(&local)?;
                tri.levels[0].faces[ci * nf + f] = fid;
            }
        }
        tri.rebuild_neighbors();
        tri.mark_boundary_faces(0);
        Ok(tri)
    }

    fn find_or_create_face(&mut self, local: &[usize]) -> Result<usize> {
        let key = sorted_key(local);
        if let Some(&fid) = self.face_lookup.get(&key) {
            let nfv = n_face_vertices(D);
            let stored = &self.faces.vertices[fid * nfv..(fid + 1) * nfv];
            if D == 3 && stored != local {
                return Err(Error::InvalidMesh(format!(
                    "face {stored:?} is seen in a different vertex order ({local:?}) by \
                     another cell; 3d meshes must use a consistent orientation"
                )));
            }
            return Ok(fid);
        }
        let fid = self.faces.boundary_id.len();
        self.faces.vertices.extend_from_slice(local);
        self.faces.boundary_id.push(INTERIOR);
        self.faces.manifold.push(ManifoldId::FLAT);
        self.face_lookup.insert(key, fid);
        Ok(fid)
    }

    /// Recomputes same-level neighbor links on every level.
    fn rebuild_neighbors(&mut self) {
        let nf = n_cell_faces(D);
        for level in &mut self.levels {
            let n = level.n_cells();
            let mut incidence: HashMap<usize, (usize, usize)> = HashMap::new();
            level.neighbors.clear();
            level.neighbors.resize(n * nf, INVALID);
            for ci in 0..n {
                for f in 0..nf {
                    let fid = level.faces[ci * nf + f];
                    match incidence.get(&fid) {
                        Some(&(cj, g)) => {
                            level.neighbors[ci * nf + f] = cj;
                            level.neighbors[cj * nf + g] = ci;
                        }
                        None => {
                            incidence.insert(fid, (ci, f));
                        }
                    }
                }
            }
        }
    }

    /// Gives every face incident to exactly one cell of `level` a boundary
    /// id of 0 unless one is already assigned.
    fn mark_boundary_faces(&mut self, level: usize) {
        let nf = n_cell_faces(D);
        let lvl = &self.levels[level];
        for ci in 0..lvl.n_cells() {
            for f in 0..nf {
                if lvl.neighbors[ci * nf + f] == INVALID {
                    let fid = lvl.faces[ci * nf + f];
                    if self.faces.boundary_id[fid] == INTERIOR {
                        self.faces.boundary_id[fid] = 0;
                    }
                }
            }
        }
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_levels(&self) -> usize {
        self.levels.len()
    }

    pub fn n_cells_on_level(&self, level: usize) -> usize {
        self.levels[level].n_cells()
    }

    pub fn n_cells(&self) -> usize {
        self.levels.iter().map(Level::n_cells).sum()
    }

    pub fn n_active_cells(&self) -> usize {
        self.levels
            .iter()
            .map(|l| l.active.iter().filter(|&&a| a).count())
            .sum()
    }

    pub fn vertex(&self, index: usize) -> Point<D> {
        self.vertices[index]
    }

    pub fn is_active(&self, cell: CellHandle) -> bool {
        self.levels[cell.level].active[cell.index]
    }

    pub fn cell_vertex_indices(&self, cell: CellHandle) -> &[usize] {
        let nv = n_cell_vertices(D);
        &self.levels[cell.level].cell_vertices[cell.index * nv..(cell.index + 1) * nv]
    }

    pub fn cell_face_indices(&self, cell: CellHandle) -> &[usize] {
        let nf = n_cell_faces(D);
        &self.levels[cell.level].faces[cell.index * nf..(cell.index + 1) * nf]
    }

    pub fn cell_manifold_id(&self, cell: CellHandle) -> ManifoldId {
        self.levels[cell.level].manifold[cell.index]
    }

    pub fn cell_material_id(&self, cell: CellHandle) -> u32 {
        self.levels[cell.level].material[cell.index]
    }

    pub fn parent(&self, cell: CellHandle) -> Option<CellHandle> {
        let p = self.levels[cell.level].parent[cell.index];
        (p != INVALID).then(|| CellHandle {
            level: cell.level - 1,
            index: p,
        })
    }

    /// Child `k` (lexicographic position) of a refined cell.
    pub fn child(&self, cell: CellHandle, k: usize) -> Option<CellHandle> {
        let start = self.levels[cell.level].children_start[cell.index];
        (start != INVALID).then(|| CellHandle {
            level: cell.level + 1,
            index: start + k,
        })
    }

    /// The lexicographic position of `cell` within its parent.
    pub fn child_position(&self, cell: CellHandle) -> Option<usize> {
        let parent = self.parent(cell)?;
        let start = self.levels[parent.level].children_start[parent.index];
        Some(cell.index - start)
    }

    pub fn face_vertex_indices(&self, face: usize) -> &[usize] {
        let nfv = n_face_vertices(D);
        &self.faces.vertices[face * nfv..(face + 1) * nfv]
    }

    pub fn face_boundary_id(&self, face: usize) -> Option<u32> {
        let id = self.faces.boundary_id[face];
        (id != INTERIOR).then_some(id)
    }

    pub fn face_manifold_id(&self, face: usize) -> ManifoldId {
        self.faces.manifold[face]
    }

    pub fn n_faces(&self) -> usize {
        self.faces.boundary_id.len()
    }

    /// Handles of all cells, active or not, in (level, index) order.
    pub fn all_cells(&self) -> impl Iterator<Item = CellHandle> + '_ {
        self.levels.iter().enumerate().flat_map(|(l, level)| {
            (0..level.n_cells()).map(move |i| CellHandle { level: l, index: i })
        })
    }

    /// Handles of active cells in (level, index) order.
    pub fn active_cells(&self) -> impl Iterator<Item = CellHandle> + '_ {
        self.levels.iter().enumerate().flat_map(|(l, level)| {
            level
                .active
                .iter()
                .enumerate()
                .filter(|(_, &a)| a)
                .map(move |(i, _)| CellHandle { level: l, index: i })
        })
    }

    /// Handles of all cells on one level, for level-wise multigrid loops.
    pub fn cells_on_level(&self, level: usize) -> impl Iterator<Item = CellHandle> + '_ {
        (0..self.levels[level].n_cells()).map(move |i| CellHandle { level, index: i })
    }

    pub fn neighbor(&self, cell: CellHandle, face_no: usize) -> NeighborInfo {
        let nf = n_cell_faces(D);
        assert!(face_no < nf, "face number {face_no} out of range");
        let lvl = &self.levels[cell.level];
        let same = lvl.neighbors[cell.index * nf + face_no];
        if same != INVALID {
            return NeighborInfo::SameLevel(CellHandle {
                level: cell.level,
                index: same,
            });
        }
        if let Some(parent) = self.parent(cell) {
            let child = cell.index - self.levels[parent.level].children_start[parent.index];
            if child_on_face(child, face_no) {
                let np = self.levels[parent.level].neighbors[parent.index * nf + face_no];
                if np != INVALID {
                    return NeighborInfo::Coarser {
                        cell: CellHandle {
                            level: parent.level,
                            index: np,
                        },
                        subface: subface_of_child::<D>(child, face_no),
                    };
                }
            }
        }
        NeighborInfo::Boundary
    }

    /// Children of a refined cell that touch face `f`, in subface order.
    pub fn children_on_face(&self, cell: CellHandle, f: usize) -> Vec<CellHandle> {
        (0..n_cell_vertices(D))
            .filter(|&k| child_on_face(k, f))
            .filter_map(|k| self.child(cell, k))
            .collect()
    }

    pub fn set_refine_flag(&mut self, cell: CellHandle) -> Result<()> {
        if !self.levels[cell.level].active[cell.index] {
            return Err(Error::NotActive {
                level: cell.level,
                index: cell.index,
            });
        }
        self.levels[cell.level].refine[cell.index] = true;
        Ok(())
    }

    pub fn refine_flag(&self, cell: CellHandle) -> bool {
        self.levels[cell.level].refine[cell.index]
    }

    /// Flags every active cell, for global refinement sweeps.
    pub fn set_all_refine_flags(&mut self) {
        for level in &mut self.levels {
            for (r, &a) in level.refine.iter_mut().zip(&level.active) {
                *r = a;
            }
        }
    }

    /// Convenience wrapper: `n` rounds of global refinement.
    pub fn refine_global(&mut self, n: usize) -> Result<()> {
        for _ in 0..n {
            self.set_all_refine_flags();
            self.execute_refinement()?;
        }
        Ok(())
    }

    pub fn set_material_id(&mut self, cell: CellHandle, id: u32) {
        self.levels[cell.level].material[cell.index] = id;
    }

    pub fn set_cell_manifold_id(&mut self, cell: CellHandle, id: ManifoldId) {
        self.levels[cell.level].manifold[cell.index] = id;
    }

    pub fn set_face_manifold_id(&mut self, cell: CellHandle, face_no: usize, id: ManifoldId) {
        let fid = self.cell_face_indices(cell)[face_no];
        self.faces.manifold[fid] = id;
    }

    pub fn set_boundary_id(&mut self, cell: CellHandle, face_no: usize, id: u32) {
        let fid = self.cell_face_indices(cell)[face_no];
        self.faces.boundary_id[fid] = id;
    }

    /// Registers a manifold object under `id`. Curved manifolds are a 2d
    /// feature; 3d meshes refine all entities by straight averaging.
    pub fn set_manifold(&mut self, id: u32, manifold: Box<dyn Manifold<D>>) -> Result<()> {
        if D != 2 {
            return Err(Error::InvalidMesh(
                "manifold attachment is only supported on 2d triangulations".into(),
            ));
        }
        self.manifolds.insert(id, manifold);
        Ok(())
    }

    /// Registers a polar manifold about `center` under `id`.
    pub fn set_polar_manifold(&mut self, id: u32, center: Point<D>) -> Result<()> {
        self.set_manifold(id, Box::new(crate::geometry::PolarManifold::new(center)))?;
        self.polar_centers.insert(id, center);
        Ok(())
    }

    /// Declares `id` transfinite and builds one interpolation chart per
    /// level-0 cell carrying it. Faces whose manifold is a registered polar
    /// manifold become circular arc edges of the chart; all other faces
    /// become straight edges. Must be called after the polar manifolds and
    /// the cell/face manifold ids are in place.
    pub fn set_transfinite_manifold(&mut self, id: u32) -> Result<()> {
        if D != 2 {
            return Err(Error::InvalidMesh(
                "transfinite interpolation is only supported on 2d triangulations".into(),
            ));
        }
        let nv = n_cell_vertices(D);
        let nf = n_cell_faces(D);
        let n0 = self.levels[0].n_cells();
        for ci in 0..n0 {
            if self.levels[0].manifold[ci].0 != id {
                continue;
            }
            let verts: Vec<Point<2>> = (0..nv)
                .map(|k| point_d_to_2(self.vertices[self.levels[0].cell_vertices[ci * nv + k]]))
                .collect();
            let edge = |f: usize, a: Point<2>, b: Point<2>| -> EdgeCurve {
                let fid = self.levels[0].faces[ci * nf + f];
                let m = self.faces.manifold[fid];
                match self.polar_centers.get(&m.0) {
                    Some(&center) => EdgeCurve::PolarArc {
                        center: point_d_to_2(center),
                        a,
                        b,
                    },
                    None => EdgeCurve::Line { a, b },
                }
            };
            let chart = TransfiniteChart::new(
                edge(2, verts[0], verts[1]),
                edge(3, verts[2], verts[3]),
                edge(0, verts[0], verts[2]),
                edge(1, verts[1], verts[3]),
                [verts[0], verts[1], verts[2], verts[3]],
            )?;
            self.charts.insert(ci, chart);
        }
        self.transfinite_ids.insert(id);
        Ok(())
    }

    /// The chart coordinates of `cell` within its level-0 ancestor: origin
    /// and edge length of the dyadic uv rectangle, plus the ancestor index.
    fn uv_rect(&self, cell: CellHandle) -> (usize, [f64; 2], f64) {
        let mut path = Vec::new();
        let mut cur = cell;
        while let Some(parent) = self.parent(cur) {
            path.push(cur.index - self.levels[parent.level].children_start[parent.index]);
            cur = parent;
        }
        let mut origin = [0.0; 2];
        let mut size = 1.0;
        for &child in path.iter().rev() {
            size *= 0.5;
            origin[0] += (child & 1) as f64 * size;
            origin[1] += ((child >> 1) & 1) as f64 * size;
        }
        (cur.index, origin, size)
    }

    /// Maps a reference-cell point of `cell` to real space through the
    /// attached manifolds: transfinite cells evaluate their chart, points on
    /// a face with a registered manifold are averaged through it, and
    /// everything else is multilinear in the cell corners.
    ///
    /// Refinement uses this to place new vertices and the polynomial mapping
    /// uses it to place support points, so both see the same geometry.
    pub fn cell_point(&self, cell: CellHandle, reference: Point<D>) -> Result<Point<D>> {
        let nv = n_cell_vertices(D);
        let verts = self.cell_vertex_indices(cell);
        let manifold_id = self.cell_manifold_id(cell);

        if D == 2 && self.transfinite_ids.contains(&manifold_id.0) {
            let (root, origin, size) = self.uv_rect(cell);
            let chart = self.charts.get(&root).ok_or(Error::NotInitialized)?;
            let uv = Point::new([
                origin[0] + size * reference[0],
                origin[1] + size * reference[1],
            ]);
            return chart.eval(uv).map(point2_to_d::<D>);
        }

        const PIN_TOL: f64 = 1e-14;
        let pinned: Vec<Option<usize>> = (0..D)
            .map(|d| {
                if reference[d].abs() <= PIN_TOL {
                    Some(0)
                } else if (reference[d] - 1.0).abs() <= PIN_TOL {
                    Some(1)
                } else {
                    None
                }
            })
            .collect();

        if D == 2 {
            let n_pinned = pinned.iter().filter(|p| p.is_some()).count();
            if n_pinned == 1 {
                let axis = pinned.iter().position(|p| p.is_some()).unwrap();
                let f = 2 * axis + pinned[axis].unwrap();
                let fid = self.cell_face_indices(cell)[f];
                if let Some(m) = self.manifolds.get(&self.faces.manifold[fid].0) {
                    let corners = face_corners::<D>(f);
                    let a = self.vertices[verts[corners[0]]];
                    let b = self.vertices[verts[corners[1]]];
                    let t = reference[1 - axis];
                    return m.new_point(&[a, b], &[1.0 - t, t]);
                }
            }
        }

        let mut weights = vec![0.0; nv];
        for (k, w) in weights.iter_mut().enumerate() {
            let mut acc = 1.0;
            for d in 0..D {
                acc *= if (k >> d) & 1 == 1 {
                    reference[d]
                } else {
                    1.0 - reference[d]
                };
            }
            *w = acc;
        }
        let points: Vec<Point<D>> = verts.iter().map(|&v| self.vertices[v]).collect();
        if let Some(m) = self.manifolds.get(&manifold_id.0) {
            m.new_point(&points, &weights)
        } else {
            let mut coords = [0.0; D];
            for (p, w) in points.iter().zip(&weights) {
                for d in 0..D {
                    coords[d] += w * p[d];
                }
            }
            Ok(Point::new(coords))
        }
    }

    /// Transitively flags coarser neighbors of flagged cells so that the
    /// refined mesh keeps the 2:1 balance. Returns the number of flags added.
    fn balance_flags(&mut self) -> usize {
        let nf = n_cell_faces(D);
        let mut added = 0;
        loop {
            let mut changed = false;
            for l in (0..self.levels.len()).rev() {
                for i in 0..self.levels[l].n_cells() {
                    if !self.levels[l].active[i] || !self.levels[l].refine[i] {
                        continue;
                    }
                    let cell = CellHandle { level: l, index: i };
                    for f in 0..nf {
                        if let NeighborInfo::Coarser { cell: n, .. } = self.neighbor(cell, f) {
                            debug_assert!(self.levels[n.level].active[n.index]);
                            if !self.levels[n.level].refine[n.index] {
                                self.levels[n.level].refine[n.index] = true;
                                added += 1;
                                changed = true;
                            }
                        }
                    }
                }
            }
            if !changed {
                return added;
            }
        }
    }

    /// Splits every flagged cell (plus balance additions) into `2^D`
    /// children, clears all flags, and restores neighbor links.
    pub fn execute_refinement(&mut self) -> Result<RefinementReport> {
        let mut report = RefinementReport {
            n_new_cells: 0,
            n_flag_additions_for_balance: self.balance_flags(),
        };
        let n_levels = self.levels.len();
        for l in 0..n_levels {
            let flagged: Vec<usize> = (0..self.levels[l].n_cells())
                .filter(|&i| self.levels[l].refine[i] && self.levels[l].active[i])
                .collect();
            for i in flagged {
                self.refine_cell(CellHandle { level: l, index: i })?;
                report.n_new_cells += n_cell_vertices(D);
            }
        }
        for level in &mut self.levels {
            level.refine.iter_mut().for_each(|r| *r = false);
        }
        self.rebuild_neighbors();
        Ok(report)
    }

    fn refine_cell(&mut self, cell: CellHandle) -> Result<()> {
        let nv = n_cell_vertices(D);
        let nf = n_cell_faces(D);
        if self.levels.len() == cell.level + 1 {
            self.levels.push(Level::default());
        }

        let pow3: usize = 3usize.pow(D as u32);
        let corners: Vec<usize> = self.cell_vertex_indices(cell).to_vec();
        let cell_faces: Vec<usize> = self.cell_face_indices(cell).to_vec();
        let manifold_id = self.cell_manifold_id(cell);
        let material = self.cell_material_id(cell);

        // Vertex ids on the 3^D refinement lattice of this cell; position p
        // (each coordinate 0, 1, or 2) is reference point p/2.
        let mut lattice = vec![INVALID; pow3];
        for k in 0..nv {
            let mut lp = 0;
            let mut stride = 1;
            for d in 0..D {
                lp += ((k >> d) & 1) * 2 * stride;
                stride *= 3;
            }
            lattice[lp] = corners[k];
        }
        for lp in 0..pow3 {
            if lattice[lp] != INVALID {
                continue;
            }
            let mut p = [0usize; 3];
            let mut rest = lp;
            for pd in p.iter_mut().take(D) {
                *pd = rest % 3;
                rest /= 3;
            }
            let odd: Vec<usize> = (0..D).filter(|&d| p[d] == 1).collect();
            // Corner vertices of the entity this lattice point sits on.
            let mut entity = Vec::with_capacity(1 << odd.len());
            for combo in 0..(1usize << odd.len()) {
                let mut k = 0;
                for d in 0..D {
                    let bit = match odd.iter().position(|&e| e == d) {
                        Some(j) => (combo >> j) & 1,
                        None => p[d] / 2,
                    };
                    k |= bit << d;
                }
                entity.push(corners[k]);
            }
            let existing = match odd.len() {
                1 => {
                    let key = (entity[0].min(entity[1]), entity[0].max(entity[1]));
                    self.edge_midpoints.get(&key).copied()
                }
                2 if D == 3 => {
                    let mut key = [entity[0], entity[1], entity[2], entity[3]];
                    key.sort_unstable();
                    self.face_centers.get(&key).copied()
                }
                _ => None,
            };
            lattice[lp] = match existing {
                Some(v) => v,
                None => {
                    let mut reference = [0.0; D];
                    for d in 0..D {
                        reference[d] = p[d] as f64 * 0.5;
                    }
                    let pos = self.cell_point(cell, Point::new(reference))?;
                    let v = self.vertices.len();
                    self.vertices.push(pos);
                    match odd.len() {
                        1 => {
                            let key = (entity[0].min(entity[1]), entity[0].max(entity[1]));
                            self.edge_midpoints.insert(key, v);
                        }
                        2 if D == 3 => {
                            let mut key = [entity[0], entity[1], entity[2], entity[3]];
                            key.sort_unstable();
                            self.face_centers.insert(key, v);
                        }
                        _ => {}
                    }
                    v
                }
            };
        }

        let children_start = self.levels[cell.level + 1].n_cells();
        self.levels[cell.level].children_start[cell.index] = children_start;
        self.levels[cell.level].active[cell.index] = false;

        for child in 0..nv {
            let mut child_vertices = vec![0usize; nv];
            for (o, cv) in child_vertices.iter_mut().enumerate() {
                let mut lp = 0;
                let mut stride = 1;
                for d in 0..D {
                    lp += (((child >> d) & 1) + ((o >> d) & 1)) * stride;
                    stride *= 3;
                }
                *cv = lattice[lp];
            }

            let mut child_faces = vec![INVALID; nf];
            for (f, cf) in child_faces.iter_mut().enumerate() {
                let local: Vec<usize> = face_corners::<D>(f)
                    .iter()
                    .map(|&k| child_vertices[k])
                    .collect();
                let key = sorted_key(&local);
                let fid = match self.face_lookup.get(&key) {
                    Some(&fid) => {
                        if D == 3 {
                            let nfv = n_face_vertices(D);
                            debug_assert_eq!(
                                &self.faces.vertices[fid * nfv..(fid + 1) * nfv],
                                &local[..],
                                "child face orientation mismatch"
                            );
                        }
                        fid
                    }
                    None => {
                        let fid = self.faces.boundary_id.len();
                        self.faces.vertices.extend_from_slice(&local);
                        if child_on_face(child, f) {
                            // Lies on the parent's face f: inherit its ids.
                            let parent_face = cell_faces[f];
                            self.faces.boundary_id.push(self.faces.boundary_id[parent_face]);
                            self.faces.manifold.push(self.faces.manifold[parent_face]);
                        } else {
                            // Interior to the parent cell.
                            self.faces.boundary_id.push(INTERIOR);
                            self.faces.manifold.push(manifold_id);
                        }
                        self.face_lookup.insert(key, fid);
                        fid
                    }
                };
                *cf = fid;
            }

            let next = &mut self.levels[cell.level + 1];
            next.cell_vertices.extend_from_slice(&child_vertices);
            next.parent.push(cell.index);
            next.children_start.push(INVALID);
            next.active.push(true);
            next.material.push(material);
            next.manifold.push(manifold_id);
            next.refine.push(false);
            next.faces.extend_from_slice(&child_faces);
            next.neighbors.extend(std::iter::repeat(INVALID).take(nf));
        }
        Ok(())
    }

    /// Verifies the 2:1 invariant: across every face, active refinement
    /// levels differ by at most one.
    pub fn verify_balance(&self) -> Result<()> {
        let nf = n_cell_faces(D);
        for cell in self.active_cells() {
            for f in 0..nf {
                if let NeighborInfo::SameLevel(n) = self.neighbor(cell, f) {
                    if !self.is_active(n) {
                        // Neighbor is refined; its children on the shared
                        // face must all be active or the difference is > 1.
                        let opposite = f ^ 1;
                        for child in self.children_on_face(n, opposite) {
                            if !self.is_active(child) {
                                return Err(Error::InvalidMesh(format!(
                                    "cells {cell:?} and {child:?} violate the 2:1 balance \
                                     across face {f}"
                                )));
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// True when every cell on levels `0..n_levels-1` is refined, i.e. the
    /// hierarchy came from global refinement only.
    pub fn is_globally_refined(&self) -> bool {
        self.levels[..self.levels.len() - 1]
            .iter()
            .all(|l| l.active.iter().all(|&a| !a))
    }

    /// True when no registered manifold influences this cell: every new
    /// point inside it comes from straight multilinear interpolation. Such
    /// cells admit the axis-aligned fast paths in the mapping layer.
    pub fn cell_is_straight(&self, cell: CellHandle) -> bool {
        let mid = self.cell_manifold_id(cell).0;
        if self.manifolds.contains_key(&mid) || self.transfinite_ids.contains(&mid) {
            return false;
        }
        self.cell_face_indices(cell).iter().all(|&f| {
            let fm = self.faces.manifold[f].0;
            !self.manifolds.contains_key(&fm) && !self.transfinite_ids.contains(&fm)
        })
    }

    /// Looks up a face by its vertex set, in any order.
    pub fn find_face(&self, vertices: &[usize]) -> Option<usize> {
        self.face_lookup.get(&sorted_key(vertices)).copied()
    }

    pub(crate) fn set_face_boundary_id_raw(&mut self, face: usize, id: u32) {
        self.faces.boundary_id[face] = id;
    }

    pub(crate) fn set_face_manifold_id_raw(&mut self, face: usize, id: ManifoldId) {
        self.faces.manifold[face] = id;
    }
}
