use thiserror::Error;

/// Errors produced by the core library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid collection: {0}")]
    InvalidCollection(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("choice systems are defined over different collections")]
    CollectionMismatch,

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("support violation at index {index}: reference probability is zero where the other is positive")]
    SupportViolation { index: usize },

    #[error("graph is not Eulerian: {0}")]
    NotEulerian(String),

    #[error("graph is disconnected ({components} components)")]
    Disconnected { components: usize },

    #[error("decomposition is incomplete: {uncovered} edges not covered by cycles")]
    IncompleteDecomposition { uncovered: usize },

    #[error("invalid decomposition: {0}")]
    InvalidDecomposition(String),

    #[error("strategy precondition failed: {0}")]
    StrategyPrecondition(String),

    #[error("perturbation family of size 2^{cycles} exceeds the limit {limit}")]
    FamilyTooLarge { cycles: usize, limit: u64 },

    #[error("delta = {delta} exceeds (2 mu)^-1 = {max}")]
    DeltaTooLarge { delta: f64, max: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("size guard violated: {0}")]
    Guard(String),

    #[error("optimizer did not converge after {iterations} iterations (gradient norm {grad_norm:.3e})")]
    NonConvergence { iterations: usize, grad_norm: f64 },

    #[error("orientations do not belong to the same decomposition: {0}")]
    DecompositionMismatch(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
