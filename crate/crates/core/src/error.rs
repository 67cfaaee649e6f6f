use thiserror::Error;

/// Errors produced by the `triphot` library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("state has zero norm and cannot be normalized")]
    ZeroState,
    #[error("non-finite amplitude in state")]
    NonFinite,
    #[error("basis index {0} out of range 0..=2")]
    IndexOutOfRange(usize),
    #[error("operator is not unitary (residual {0:.3e})")]
    NonUnitaryOperator(f64),
    #[error("detector efficiency {0} outside [0, 1]")]
    InvalidEfficiency(f64),
    #[error("bandwidth must be positive, got {0}")]
    NonPositiveBandwidth(f64),
    #[error("sweep table is degenerate: {0}")]
    DegenerateTable(&'static str),
    #[error("value {value} out of range for {what}")]
    OutOfRange { what: &'static str, value: f64 },
    #[error("parameter vector has length {got}, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid configuration field `{field}`: {reason}")]
    InvalidConfig { field: String, reason: String },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
