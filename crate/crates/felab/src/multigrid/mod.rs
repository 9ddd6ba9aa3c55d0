//! Geometric multigrid on globally refined hierarchies.
//!
//! The V-cycle runs over the refinement levels of a [`crate::mesh::Triangulation`]
//! produced by global refinement only: each level gets its own DoF
//! enumeration, a matrix-free level operator with eliminated Dirichlet
//! boundary, degree-6 Chebyshev smoothing by default, and interpolation
//! based transfer. One cycle per CG iteration yields iteration counts that
//! stay flat as the mesh is refined.

mod chebyshev;
mod hierarchy;
mod vcycle;

pub use chebyshev::{estimate_largest_eigenvalue, ChebyshevSmoother};
pub use hierarchy::{build_hierarchy, MGHierarchy, MGOptions};
pub use vcycle::{mg_preconditioned_cg, MGPreconditioner};
