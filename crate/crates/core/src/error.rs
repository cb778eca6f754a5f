use thiserror::Error;

/// Errors raised by the linear-algebra, state and protocol layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("subsystem index {index} out of range for {count} factors")]
    IndexOutOfRange { index: usize, count: usize },

    #[error("invalid subsystem selection {0:?}")]
    InvalidSelection(Vec<usize>),

    #[error("invalid permutation {0:?}")]
    InvalidPermutation(Vec<usize>),

    #[error("expected a bipartite shape, got {0} factors")]
    NotBipartite(usize),

    #[error("local dimension must be at least 2, got {0}")]
    InvalidDimension(usize),

    #[error("matrix is not Hermitian (deviation {0:e})")]
    NotHermitian(f64),

    #[error("matrix is not positive semidefinite (eigenvalue {0:e})")]
    NotPositive(f64),

    #[error("state vector is not normalized (norm {0})")]
    NotNormalized(f64),

    #[error("fidelity {0} outside [0, 1]")]
    FidelityOutOfRange(f64),

    #[error("label ({k}, {l}) out of range for d = {d}")]
    LabelOutOfRange { k: usize, l: usize, d: usize },

    #[error("isometry check failed: |V^dag V - I| = {0:e}")]
    NotIsometry(f64),

    #[error("ensemble size {m} is smaller than the rank {rank}")]
    EnsembleTooSmall { m: usize, rank: usize },

    #[error("analytic and dense routes disagree by {0:e}")]
    RouteDisagreement(f64),

    #[error("fidelity grid needs at least {min} points, got {got}")]
    GridTooCoarse { min: usize, got: usize },

    #[error("eigensolver failed to converge")]
    EigenFailure,
}

pub type Result<T> = std::result::Result<T, Error>;
