//! Matrix-free operator evaluation with sum factorization.
//!
//! Instead of assembling a sparse matrix, [`LaplaceOperatorMF`] applies the
//! bilinear form cell by cell. Cells are grouped into batches of `w` lanes
//! laid out lane-innermost, gradients are evaluated through 1d tensor
//! contractions, and hanging-node constraints are resolved on the fly during
//! gather and scatter. For degree p in d dimensions one operator application
//! costs Θ((p+1)^(d+1)) multiply-adds per cell, compared to Θ((p+1)^(2d)) for
//! a local dense matvec.

mod data;
mod kernel;
mod operator;
mod real;

pub use data::{build_matrix_free, Batch, DofResolution, MatrixFreeData, MAX_BATCH_WIDTH};
pub use operator::LaplaceOperatorMF;
pub use real::Real;
