use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("line {line}: self-loop on node {node}")]
    SelfLoop { line: usize, node: usize },

    #[error("line {line}: pair ({u}, {v}) listed with conflicting signs")]
    ConflictingDuplicate { line: usize, u: usize, v: usize },

    #[error("node {node} out of range for n = {n}")]
    NodeOutOfRange { node: usize, n: usize },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("community count mismatch: expected {expected}, got {got}")]
    KMismatch { expected: usize, got: usize },

    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("conditioning event has probability zero (all edge probabilities are 0)")]
    ZeroProbabilityEvent,

    #[error("eigensolver did not converge after {iterations} iterations (residual {residual:.3e})")]
    EigenNonConvergence { iterations: usize, residual: f64 },

    #[error("max-cut instance has {k} communities; exact search is limited to {limit}")]
    TooLargeForExact { k: usize, limit: usize },

    #[error("quadratic form contains non-finite entries")]
    NonFinite,

    #[error("fold {0} has no held-out pairs")]
    EmptyFold(usize),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
