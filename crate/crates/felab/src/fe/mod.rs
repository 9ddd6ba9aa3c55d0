//! Tensor-product Lagrange elements on `[0,1]^d` and Gauss quadrature.

pub mod element;
pub mod lagrange;
pub mod quadrature;

pub use element::{FiniteElementQ, MAX_DEGREE};
pub use lagrange::{gauss_legendre, gauss_lobatto, Lagrange1d};
pub use quadrature::Quadrature;
