//! Writers for simulation artifacts.
//!
//! The only format currently supported is legacy ASCII VTK. Every common
//! visualization tool still reads it, it needs no dependencies, and the
//! fixed 17-significant-digit formatting makes written files verifiable
//! byte for byte in tests.

pub mod vtk;

pub use vtk::VtkDataSet;
