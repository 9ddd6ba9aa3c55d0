//! Global degree-of-freedom enumeration for continuous Q_p spaces.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::fe::FiniteElementQ;
use crate::geometry::Point;
use crate::mesh::{CellHandle, Triangulation};

/// Identity of the mesh entity a basis function is attached to. Two cells
/// touching the same entity must produce the same key, which is what makes
/// the numbering conforming.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum EntityKey {
    Vertex(usize),
    /// Edge interior node; `a < b` are the global endpoint vertices and the
    /// ordinal counts nodes from `a` towards `b`.
    Edge { a: usize, b: usize, ordinal: usize },
    /// Face interior node in 3d, ordinals along the two tangent axes.
    Face { face: usize, i: usize, j: usize },
    /// Cell interior node, never shared.
    Interior {
        level: usize,
        index: usize,
        ordinal: usize,
    },
}

struct DofData<const D: usize> {
    n_dofs: usize,
    cells: Vec<CellHandle>,
    cell_dofs: HashMap<CellHandle, Vec<usize>>,
    support_points: Vec<Point<D>>,
}

/// Attaches global indices to the basis functions of a [`FiniteElementQ`]
/// over a set of mesh cells.
///
/// Numbering is deterministic: cells are visited in `(level, index)` order
/// and each entity receives its index on first encounter.
pub struct DoFHandler<const D: usize> {
    degree: usize,
    data: Option<DofData<D>>,
}

impl<const D: usize> DoFHandler<D> {
    pub fn new() -> Self {
        Self {
            degree: 0,
            data: None,
        }
    }

    /// Numbers all basis functions on the active cells; returns the number of
    /// global DoFs.
    pub fn distribute_dofs(
        &mut self,
        tri: &Triangulation<D>,
        fe: &FiniteElementQ<D>,
    ) -> Result<usize> {
        let cells: Vec<CellHandle> = tri.active_cells().collect();
        self.distribute_on_cells(tri, fe, cells)
    }

    /// Same as [`Self::distribute_dofs`] but over an explicit cell set, e.g.
    /// all cells of one refinement level for a multigrid hierarchy.
    pub fn distribute_on_cells(
        &mut self,
        tri: &Triangulation<D>,
        fe: &FiniteElementQ<D>,
        cells: Vec<CellHandle>,
    ) -> Result<usize> {
        let p = fe.degree();
        let mut keys: HashMap<EntityKey, usize> = HashMap::new();
        let mut support_points: Vec<Point<D>> = Vec::new();
        let mut cell_dofs: HashMap<CellHandle, Vec<usize>> = HashMap::new();

        for &cell in &cells {
            let cv = tri.cell_vertex_indices(cell);
            let mut local_to_global = Vec::with_capacity(fe.dofs_per_cell());
            for local in 0..fe.dofs_per_cell() {
                let t = fe.tensor_index(local);
                let interior: Vec<usize> = (0..D).filter(|&a| t[a] > 0 && t[a] < p).collect();
                let key = match interior.len() {
                    0 => {
                        let k = (0..D).fold(0, |acc, a| acc | (usize::from(t[a] == p) << a));
                        EntityKey::Vertex(cv[k])
                    }
                    1 => {
                        let axis = interior[0];
                        let k0 = (0..D)
                            .filter(|&a| a != axis)
                            .fold(0, |acc, a| acc | (usize::from(t[a] == p) << a));
                        let k1 = k0 | (1 << axis);
                        let (va, vb) = (cv[k0], cv[k1]);
                        let ordinal = t[axis] - 1;
                        if va <= vb {
                            EntityKey::Edge {
                                a: va,
                                b: vb,
                                ordinal,
                            }
                        } else {
                            EntityKey::Edge {
                                a: vb,
                                b: va,
                                ordinal: p - 2 - ordinal,
                            }
                        }
                    }
                    2 if D == 3 => {
                        let normal = (0..D).find(|a| !interior.contains(a)).unwrap();
                        let side = usize::from(t[normal] == p);
                        let face = tri.cell_face_indices(cell)[2 * normal + side];
                        EntityKey::Face {
                            face,
                            i: t[interior[0]] - 1,
                            j: t[interior[1]] - 1,
                        }
                    }
                    _ => EntityKey::Interior {
                        level: cell.level,
                        index: cell.index,
                        ordinal: local,
                    },
                };

                let global = match keys.get(&key) {
                    Some(&g) => g,
                    None => {
                        let g = support_points.len();
                        support_points.push(tri.cell_point(cell, fe.node(local))?);
                        keys.insert(key, g);
                        g
                    }
                };
                local_to_global.push(global);
            }
            cell_dofs.insert(cell, local_to_global);
        }

        let n_dofs = support_points.len();
        self.degree = p;
        self.data = Some(DofData {
            n_dofs,
            cells,
            cell_dofs,
            support_points,
        });
        Ok(n_dofs)
    }

    fn data(&self) -> Result<&DofData<D>> {
        self.data.as_ref().ok_or(Error::NotDistributed)
    }

    pub fn is_distributed(&self) -> bool {
        self.data.is_some()
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn n_dofs(&self) -> Result<usize> {
        Ok(self.data()?.n_dofs)
    }

    /// Cells in distribution order.
    pub fn cells(&self) -> Result<&[CellHandle]> {
        Ok(&self.data()?.cells)
    }

    /// Global indices of one cell's basis functions, in lexicographic local
    /// order.
    pub fn cell_dof_indices(&self, cell: CellHandle) -> Result<&[usize]> {
        self.data()?.cell_dofs.get(&cell).map(Vec::as_slice).ok_or(
            Error::NotActive {
                level: cell.level,
                index: cell.index,
            },
        )
    }

    /// Real-space location of a global DoF's interpolation node.
    pub fn support_point(&self, dof: usize) -> Result<Point<D>> {
        let data = self.data()?;
        data.support_points
            .get(dof)
            .copied()
            .ok_or(Error::IndexError {
                index: dof,
                limit: data.n_dofs,
            })
    }
}

impl<const D: usize> Default for DoFHandler<D> {
    fn default() -> Self {
        Self::new()
    }
}

/// Local indices of the basis functions whose nodes lie on the closed face
/// `face_no`, in lexicographic order of the remaining axes.
pub(crate) fn local_face_dofs<const D: usize>(
    fe: &FiniteElementQ<D>,
    face_no: usize,
) -> Vec<usize> {
    let axis = face_no / 2;
    let want = if face_no % 2 == 1 { fe.degree() } else { 0 };
    (0..fe.dofs_per_cell())
        .filter(|&local| fe.tensor_index(local)[axis] == want)
        .collect()
}
