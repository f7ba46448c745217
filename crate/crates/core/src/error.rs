use thiserror::Error;

/// Errors raised while reading or building instances.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum InstanceError {
    #[error("line {line}: malformed header: {reason}")]
    Header { line: usize, reason: String },
    #[error("line {line}: invalid token {token:?}")]
    Token { line: usize, token: String },
    #[error("line {line}: dimension mismatch: {reason}")]
    Dimension { line: usize, reason: String },
    #[error("instance index {index} out of range ({available} instances in source)")]
    OutOfRange { index: usize, available: usize },
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("invalid instance: {0}")]
    Invalid(String),
    #[error("i/o error: {0}")]
    Io(String),
}

/// Errors raised by the solver and its building blocks.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SolverError {
    #[error("permutation has length {got}, instance has {expected} jobs")]
    Dimension { expected: usize, got: usize },
    #[error("invalid argument: {0}")]
    Argument(String),
}

/// Errors raised by the statistics helpers.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StatsError {
    #[error("empty sample")]
    EmptySample,
}

/// Errors raised while running experiments or writing reports.
#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("invalid experiment configuration: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}
