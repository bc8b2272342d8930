use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("coordinate {index} out of range for arity {arity}")]
    CoordinateOutOfRange { index: usize, arity: usize },

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("points are linearly dependent")]
    LinearlyDependent,

    #[error("no parity satisfies every constraint: a dependent row carries a contradictory label")]
    UnsatisfiableByAnyParity,

    #[error("{what} = {value} exceeds the enumeration guard {limit}")]
    GuardExceeded {
        what: &'static str,
        value: usize,
        limit: usize,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }

    pub(crate) fn check_len(expected: usize, actual: usize) -> Result<()> {
        if expected == actual {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { expected, actual })
        }
    }
}
