use std::path::PathBuf;

use thiserror::Error;

/// Every failure the library can report.
///
/// The `Display` form always starts with the variant name so the command line
/// front end can print it verbatim as a one-line diagnostic.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("FileNotFound: {}", .0.display())]
    FileNotFound(PathBuf),
    #[error("ParseError: line {line}: {message}")]
    ParseError { line: usize, message: String },
    #[error("TooFewObservations: need at least 2 values, got {0}")]
    TooFewObservations(usize),
    #[error("NonFiniteValue: line {0}")]
    NonFiniteValue(usize),
    #[error("EmptyExceedanceSet: no observation exceeds {0}")]
    EmptyExceedanceSet(f64),
    #[error("NonPositiveOrderStatistic: X({index}) = {value}")]
    NonPositiveOrderStatistic { index: usize, value: f64 },
    #[error("BadK: {0}")]
    BadK(String),
    #[error("DegenerateSpacings: {0}")]
    DegenerateSpacings(String),
    #[error("DomainError: {0}")]
    DomainError(String),
    #[error("InvalidParameter: {0}")]
    InvalidParameter(String),
    #[error("ConvergenceFailure: {0}")]
    ConvergenceFailure(String),
    #[error("RegimeMismatch: {0}")]
    RegimeMismatch(String),
    #[error("RegimeBoundary: xi = {0} lies in [0.48, 0.52]; the ME limit at xi = 1/2 is not available")]
    RegimeBoundary(f64),
    #[error("MeanDoesNotExist: no ME band for xi>=1 (xi = {0})")]
    MeanDoesNotExist(f64),
    #[error("MissingQuantileFunction: the xi > 1 normalization needs a known quantile function b(n)")]
    MissingQuantileFunction,
    #[error("WindowMismatch: {0}")]
    WindowMismatch(String),
    #[error("Io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::DomainError(msg.into())
}
