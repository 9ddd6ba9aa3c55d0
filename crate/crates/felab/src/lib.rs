//! A dimension-generic toolkit for adaptive finite element computations on
//! quadrilateral and hexahedral meshes.
//!
//! The same code drives 2d and 3d through a const dimension parameter:
//! hierarchical meshes with hanging-node refinement ([`mesh`]), curved
//! geometry ([`geometry`]), tensor-product Lagrange elements ([`fe`]),
//! polynomial mappings ([`mapping`]), constraint-aware unknown numbering
//! ([`dofs`]), sparse assembly and CG ([`assembly`], [`linalg`]),
//! sum-factorized matrix-free operators ([`matrix_free`]), geometric
//! multigrid ([`multigrid`]), and VTK output ([`output`]).
//!
//! A minimal session, from mesh to a solved field:
//!
//! ```
//! use felab::dofs::{
//!     interpolate_boundary_values, make_hanging_node_constraints, AffineConstraints,
//!     ConstantFunction, DoFHandler,
//! };
//! use felab::fe::FiniteElementQ;
//! use felab::linalg::SolverControl;
//! use felab::mapping::MappingQ;
//! use felab::mesh::hyper_cube;
//! use felab::multigrid::{build_hierarchy, mg_preconditioned_cg, MGOptions};
//!
//! fn main() -> felab::Result<()> {
//!     // An 8x8 mesh of the unit square with bilinear elements.
//!     let mut tri = hyper_cube::<2>(0.0, 1.0, 1)?;
//!     tri.refine_global(3)?;
//!     let mut dh = DoFHandler::new();
//!     dh.distribute_dofs(&tri, &FiniteElementQ::<2>::new(1))?;
//!
//!     // u = 0 on the whole boundary; the load is handled by the rhs below.
//!     let mut constraints = AffineConstraints::new();
//!     constraints.merge(&make_hanging_node_constraints(&tri, &dh)?);
//!     for id in 0..4 {
//!         interpolate_boundary_values(&tri, &dh, id, &ConstantFunction(0.0), &mut constraints)?;
//!     }
//!     constraints.close();
//!
//!     // -laplace(u) = 1, solved by multigrid-preconditioned CG.
//!     let hierarchy = build_hierarchy(&tri, 1, &MappingQ::new(1), &[0, 1, 2, 3], &MGOptions::default())?;
//!     let mut rhs = vec![0.0; dh.n_dofs()?];
//!     felab::assembly::assemble_rhs(
//!         &tri,
//!         &dh,
//!         &constraints,
//!         &mut felab::mapping::FEValues::new(
//!             FiniteElementQ::<2>::new(1),
//!             MappingQ::new(1),
//!             felab::fe::Quadrature::gauss(2),
//!             felab::mapping::UpdateFlags::VALUES
//!                 | felab::mapping::UpdateFlags::JXW
//!                 | felab::mapping::UpdateFlags::QUADRATURE_POINTS,
//!         ),
//!         &ConstantFunction(1.0),
//!         &mut rhs,
//!     )?;
//!     let mut u = vec![0.0; dh.n_dofs()?];
//!     let info = mg_preconditioned_cg(&hierarchy, &mut u, &rhs, SolverControl::new(100, 1e-10))?;
//!     constraints.distribute(&mut u);
//!
//!     assert!(info.iterations <= 6);
//!     assert!(u.iter().cloned().fold(f64::MIN, f64::max) > 0.05);
//!     Ok(())
//! }
//! ```
//!
//! The guide in `book/` walks through each layer with worked examples; its
//! code runs as doctests through the `felab-book` crate.

pub mod assembly;
pub mod dofs;
pub mod error;
pub mod fe;
pub mod geometry;
pub mod linalg;
pub mod mapping;
pub mod matrix_free;
pub mod mesh;
pub mod multigrid;
pub mod output;

pub use error::{Error, Result};
