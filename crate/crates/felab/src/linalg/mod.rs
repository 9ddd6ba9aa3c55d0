//! Sparse matrices, dense factorizations and Krylov solvers.

pub mod cg;
pub mod dense;
pub mod operator;
pub mod sparse;
pub mod sparsity;
pub mod vector;

pub use cg::{cg_solve, SolveInfo, SolverControl};
pub use dense::{CholeskyFactor, DenseMatrix};
pub use operator::{IdentityPrecondition, JacobiPrecondition, LinearOperator, Preconditioner};
pub use sparse::SparseMatrix;
pub use sparsity::{DynamicSparsityPattern, SparsityPattern};
