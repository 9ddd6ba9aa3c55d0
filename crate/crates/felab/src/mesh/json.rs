//! Coarse-mesh description in JSON.
//!
//! ```json
//! {
//!   "dim": 2,
//!   "vertices": [[1.0, 0.0], [2.0, 0.0], [0.0, 1.0], [0.0, 2.0]],
//!   "cells": [[0, 1, 2, 3]],
//!   "boundary_ids": {"0-2": 0, "1-3": 1},
//!   "manifolds": {
//!     "1": {"type": "polar", "center": [0.0, 0.0], "faces": [[0, 2], [1, 3]]},
//!     "2": {"type": "transfinite", "cells": [0]}
//!   }
//! }
//! ```
//!
//! A face descriptor is the face's vertex indices joined by `-` in any
//! order. Unknown fields anywhere in the document are rejected.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::geometry::{FlatManifold, ManifoldId, Point};

use super::triangulation::{CellHandle, Triangulation};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct MeshFile {
    dim: usize,
    vertices: Vec<Vec<f64>>,
    cells: Vec<Vec<usize>>,
    #[serde(default)]
    boundary_ids: BTreeMap<String, u32>,
    #[serde(default)]
    manifolds: BTreeMap<String, ManifoldEntry>,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
enum ManifoldEntry {
    Flat {
        #[serde(default)]
        faces: Vec<Vec<usize>>,
        #[serde(default)]
        cells: Vec<usize>,
    },
    Polar {
        center: Vec<f64>,
        #[serde(default)]
        faces: Vec<Vec<usize>>,
        #[serde(default)]
        cells: Vec<usize>,
    },
    Transfinite {
        cells: Vec<usize>,
    },
}

fn parse_face_key(key: &str) -> Result<Vec<usize>> {
    key.split('-')
        .map(|part| {
            part.parse::<usize>()
                .map_err(|_| Error::InvalidInput(format!("bad face descriptor {key:?}")))
        })
        .collect()
}

/// Reads a coarse mesh from its JSON description.
pub fn mesh_from_json_str<const D: usize>(input: &str) -> Result<Triangulation<D>> {
    let file: MeshFile = serde_json::from_str(input)
        .map_err(|e| Error::InvalidInput(format!("mesh JSON: {e}")))?;
    if file.dim != D {
        return Err(Error::InvalidInput(format!(
            "mesh has dim {} but a {D}d mesh was requested",
            file.dim
        )));
    }

    let mut vertices = Vec::with_capacity(file.vertices.len());
    for (i, v) in file.vertices.iter().enumerate() {
        if v.len() != D {
            return Err(Error::InvalidInput(format!(
                "vertex {i} has {} coordinates, expected {D}",
                v.len()
            )));
        }
        let mut coords = [0.0; D];
        coords.copy_from_slice(v);
        vertices.push(Point::new(coords));
    }

    let mut tri = Triangulation::from_cells(vertices, &file.cells)?;

    for (key, &id) in &file.boundary_ids {
        let face_vertices = parse_face_key(key)?;
        let face = tri
            .find_face(&face_vertices)
            .ok_or_else(|| Error::InvalidInput(format!("no face with vertices {key:?}")))?;
        if tri.face_boundary_id(face).is_none() {
            return Err(Error::InvalidInput(format!(
                "face {key:?} is interior, cannot assign a boundary id"
            )));
        }
        tri.set_face_boundary_id_raw(face, id);
    }

    let mut entries: Vec<(u32, &ManifoldEntry)> = Vec::new();
    for (key, entry) in &file.manifolds {
        let id: u32 = key
            .parse()
            .map_err(|_| Error::InvalidInput(format!("manifold id {key:?} is not a number")))?;
        entries.push((id, entry));
    }
    // Transfinite charts sample the other manifolds, so register those first.
    entries.sort_by_key(|(id, entry)| (matches!(entry, ManifoldEntry::Transfinite { .. }), *id));

    for (id, entry) in entries {
        match entry {
            ManifoldEntry::Flat { faces, cells } => {
                tri.set_manifold(id, Box::new(FlatManifold))?;
                assign(&mut tri, id, faces, cells)?;
            }
            ManifoldEntry::Polar { center, faces, cells } => {
                if center.len() != D {
                    return Err(Error::InvalidInput(format!(
                        "polar manifold {id} center has {} coordinates",
                        center.len()
                    )));
                }
                let mut coords = [0.0; D];
                coords.copy_from_slice(center);
                tri.set_polar_manifold(id, Point::new(coords))?;
                assign(&mut tri, id, faces, cells)?;
            }
            ManifoldEntry::Transfinite { cells } => {
                assign(&mut tri, id, &[], cells)?;
                tri.set_transfinite_manifold(id)?;
            }
        }
    }
    Ok(tri)
}

fn assign<const D: usize>(
    tri: &mut Triangulation<D>,
    id: u32,
    faces: &[Vec<usize>],
    cells: &[usize],
) -> Result<()> {
    for face_vertices in faces {
        let face = tri.find_face(face_vertices).ok_or_else(|| {
            Error::InvalidInput(format!("no face with vertices {face_vertices:?}"))
        })?;
        tri.set_face_manifold_id_raw(face, ManifoldId(id));
    }
    for &index in cells {
        if index >= tri.n_cells_on_level(0) {
            return Err(Error::InvalidInput(format!(
                "manifold {id} references cell {index} of {}",
                tri.n_cells_on_level(0)
            )));
        }
        tri.set_cell_manifold_id(CellHandle { level: 0, index }, ManifoldId(id));
    }
    Ok(())
}

/// Reads a coarse mesh from a JSON file on disk.
pub fn mesh_from_json_file<const D: usize>(path: &Path) -> Result<Triangulation<D>> {
    let text = std::fs::read_to_string(path)?;
    mesh_from_json_str(&text)
}
