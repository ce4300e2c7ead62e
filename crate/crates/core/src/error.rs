use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("failed to build {what}: {reason}")]
    BuildFailure { what: String, reason: String },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("weight derivative vanishes at coordinate {index} (x = {x})")]
    SingularWeight { index: usize, x: f64 },
    #[error("weight is not injective on the support: {0}")]
    InvalidWeight(String),
    #[error("unsupported set family: {0}")]
    UnsupportedSet(String),
    #[error("grid covers only {covered} of the mass")]
    Coverage { covered: f64 },
    #[error("measures are not aligned: {0}")]
    Alignment(String),
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),
    #[error("invalid cost: {0}")]
    InvalidCost(String),
    #[error("problem too large: {0}")]
    Size(String),
    #[error("criterion failure: {0}")]
    Criterion(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }
}
