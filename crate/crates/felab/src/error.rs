use thiserror::Error;

/// Errors reported by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("singular tensor: |det| = {det:.3e} below threshold {threshold:.3e}")]
    SingularTensor { det: f64, threshold: f64 },

    #[error("malformed weights: {0}")]
    WeightError(String),

    #[error("weighted direction average is degenerate (norm {0:.3e})")]
    DegenerateDirection(f64),

    #[error("chart coordinate {coord:?} outside the unit square")]
    ChartError { coord: [f64; 2] },

    #[error("bad domain: {0}")]
    BadDomain(String),

    #[error("cell (level {level}, index {index}) is not active")]
    NotActive { level: usize, index: usize },

    #[error("index {index} out of range (limit {limit})")]
    IndexError { index: usize, limit: usize },

    #[error("point {0:?} outside the reference cell")]
    DomainError(Vec<f64>),

    #[error("FEValues used before reinit")]
    NotInitialized,

    #[error("update flag {0} was not requested at construction")]
    UpdateFlagMissing(&'static str),

    #[error("degrees of freedom have not been distributed")]
    NotDistributed,

    #[error("no sparsity entry at ({row}, {col})")]
    SparsityMiss { row: usize, col: usize },

    #[error("zero or negative diagonal entry at {0}")]
    ZeroDiagonal(usize),

    #[error("iterative solver did not converge in {iterations} iterations (residual {residual:.3e})")]
    MaxIterations { iterations: usize, residual: f64 },

    #[error("solver breakdown: {0}")]
    Breakdown(String),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("multigrid hierarchy requires a globally refined mesh: {0}")]
    NotGloballyRefined(String),

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
