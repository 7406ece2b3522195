use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {value} ({reason})")]
    Domain { value: f64, reason: String },

    #[error("arity error: expected at least 2 arguments, got {got}")]
    Arity { got: usize },

    #[error("arity mismatch: expected {expected} arguments, got {got}")]
    ArityMismatch { expected: usize, got: usize },

    #[error("parameter error: {0}")]
    Parameter(String),

    #[error("evaluation error: {0}")]
    Evaluation(String),

    #[error("interpolation error: {x} lies outside the table hull [{lo}, {hi}]")]
    Interpolation { x: f64, lo: f64, hi: f64 },

    #[error("range error: tile index {n} is out of range")]
    Range { n: i64 },

    #[error("overflow: {0}")]
    Overflow(String),

    #[error("table parse error at line {line}: {message}")]
    Table { line: u64, message: String },

    #[error("transform error: {0}")]
    Transform(String),

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn domain(value: f64, reason: impl Into<String>) -> Self {
        Error::Domain { value, reason: reason.into() }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
