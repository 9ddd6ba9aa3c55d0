//! Points, tensors, and the manifold machinery that feeds curved geometry
//! into mesh refinement and higher order mappings.

pub mod manifold;
pub mod point;
pub mod tensor;
pub mod transfinite;

pub use manifold::{FlatManifold, Manifold, ManifoldId, PolarManifold};
pub use point::Point;
pub use tensor::{Tensor1, Tensor2};
pub use transfinite::{bilinear_chart, EdgeCurve, TransfiniteChart};
