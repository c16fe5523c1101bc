use thiserror::Error;

/// Errors raised by the library. Each variant names the violated constraint.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("subset mask {mask:#x} has elements outside the ground set of size {n}")]
    SubsetOutOfRange { mask: u64, n: usize },

    #[error("ground set size {n} is outside the supported range 1..={max}")]
    GroundSetSize { n: usize, max: usize },

    #[error("exhaustive verification refused: n = {n} exceeds the limit of {max}")]
    TooLargeForExhaustive { n: usize, max: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("coordinate {index} = {value} lies outside [0, 1]")]
    OutOfHypercube { index: usize, value: f64 },

    #[error("vector norm {norm} exceeds the declared sensitivity bound {bound}")]
    SensitivityViolation { norm: f64, bound: f64 },

    #[error("stream overflow: all {capacity} rounds have been consumed")]
    StreamExhausted { capacity: usize },

    #[error("function mismatch: {0}")]
    FunctionMismatch(String),

    #[error("malformed fixture: {0}")]
    Fixture(String),

    #[error("regret slope undefined: mean regret {value} at horizon {horizon} is not positive")]
    NonPositiveRegret { horizon: usize, value: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
