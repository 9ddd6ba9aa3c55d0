//! Degree-of-freedom enumeration and affine constraints.

pub mod boundary;
pub mod constraints;
pub mod function;
pub mod handler;
pub mod hanging;

pub use boundary::interpolate_boundary_values;
pub use constraints::{AffineConstraints, ConstraintLine};
pub use function::{ConstantFunction, ScalarFunction};
pub use handler::DoFHandler;
pub use hanging::make_hanging_node_constraints;
