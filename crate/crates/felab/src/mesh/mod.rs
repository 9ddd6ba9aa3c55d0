//! Hierarchical quad/hex triangulations: storage, traversal, refinement,
//! and coarse-mesh generators.

pub mod accessor;
pub mod generators;
pub mod json;
pub mod triangulation;

pub use accessor::{CellAccessor, FaceAccessor};
pub use generators::{hyper_cube, hyper_shell_2d, SHELL_POLAR_ID, SHELL_TRANSFINITE_ID};
pub use json::{mesh_from_json_file, mesh_from_json_str};
pub use triangulation::{CellHandle, NeighborInfo, RefinementReport, Triangulation};

pub(crate) use triangulation::face_corners;
