use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid search space: {0}")]
    InvalidSpace(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("constraint count mismatch: expected {expected}, got {got}")]
    ConstraintCount { expected: usize, got: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("point {point:?} lies outside the domain of {problem}")]
    OutOfDomain { problem: String, point: Vec<f64> },

    #[error("gaussian process fit failed: {0}")]
    Fit(String),

    #[error("{0} requires at least one constraint")]
    NoConstraints(&'static str),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("unknown name `{0}`")]
    UnknownName(String),

    #[error("evaluation {index} failed: {source}")]
    Evaluation {
        index: usize,
        #[source]
        source: Box<dyn std::error::Error + Send + Sync>,
    },
}
