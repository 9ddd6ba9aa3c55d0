//! Reference-to-real cell mappings and the cached shape-function evaluator.

pub mod fe_values;
pub mod mapping_q;

pub use fe_values::{FEValues, UpdateFlags};
pub use mapping_q::{CellMapping, MappingQ};
