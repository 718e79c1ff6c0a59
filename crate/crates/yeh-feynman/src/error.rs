use thiserror::Error;

/// Errors produced by grid construction, sampling, and the identity checks.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Two grid-resident objects live on different grids.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("non-finite value: {0}")]
    NonFinite(String),

    /// A partial sum of reciprocal variance parameters vanishes.
    #[error("degenerate parameter: {0}")]
    DegenerateParameter(String),

    /// A theorem's kernel hypothesis does not hold on the grid; the check
    /// refuses to run rather than reporting a meaningless failure.
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),

    #[error("expression error: {0}")]
    Expr(String),
}

pub type Result<T> = std::result::Result<T, Error>;
