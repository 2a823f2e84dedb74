use thiserror::Error;

/// Errors raised by every fallible operation in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: String, found: String },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("element is not unitary: ||UU* - I||_F = {0:e}")]
    NotUnitary(f64),

    #[error("series diverges: {0}")]
    Divergent(String),

    /// Parameters fall where no stability bound is known to hold.
    #[error("open-problem region: {0}")]
    OpenProblem(String),

    #[error("overflow guard: {0}")]
    Overflow(String),

    #[error("mapping is nonzero at the origin (||f(0)|| = {0:e}); the backward scheme needs f(0) = 0")]
    NonzeroAtOrigin(f64),

    /// The field characteristic divides a constant the equivalence proof divides by.
    #[error("F_{q} is inadmissible for {equation}: q divides the obstruction constant {constant} ({name})")]
    Inadmissible {
        q: u64,
        equation: String,
        name: String,
        constant: i64,
    },

    #[error("{0} is empty")]
    Empty(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

pub(crate) fn mismatch(expected: impl ToString, found: impl ToString) -> Error {
    Error::DimensionMismatch {
        expected: expected.to_string(),
        found: found.to_string(),
    }
}
