use thiserror::Error;

/// Errors raised by the simulation library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("out of domain: {0}")]
    OutOfDomain(String),

    #[error("vertex {0:?} lies outside the box")]
    OutOfBox(Vec<i64>),

    #[error("region too small: {0}")]
    RegionTooSmall(String),

    #[error("the parameter class is {class}; the analytic answer is lambda_c = {answer}")]
    AnalyticPhase { class: String, answer: String },

    #[error("resource budget exceeded: {0}")]
    Budget(String),

    #[error("degenerate sample: {0}")]
    Degenerate(String),

    #[error("enumeration cap exceeded: {pairs} pairs (limit {limit})")]
    CapExceeded { pairs: usize, limit: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
