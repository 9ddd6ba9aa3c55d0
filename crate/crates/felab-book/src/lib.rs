//! The guide from `book/` as module documentation.
//!
//! mdbook renders the chapters for reading; this crate makes them part of the
//! test suite. Every Rust block in the book compiles and runs as a doctest
//! here, so the asserted numbers cannot drift away from the library.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/meshes.md")]
pub mod meshes {}

#[doc = include_str!("../../../book/src/geometry.md")]
pub mod geometry {}

#[doc = include_str!("../../../book/src/elements.md")]
pub mod elements {}

#[doc = include_str!("../../../book/src/mapping.md")]
pub mod mapping {}

#[doc = include_str!("../../../book/src/dofs.md")]
pub mod dofs {}

#[doc = include_str!("../../../book/src/assembly.md")]
pub mod assembly {}

#[doc = include_str!("../../../book/src/matrix_free.md")]
pub mod matrix_free {}

#[doc = include_str!("../../../book/src/multigrid.md")]
pub mod multigrid {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
