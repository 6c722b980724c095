//! Error type shared across the crate.

use alloc::string::String;
use core::fmt;

/// Crate-wide result alias.
pub type Result<T> = core::result::Result<T, Error>;

/// Failure modes of the arithmetic layers.
///
/// `Contract` means a caller violated a documented precondition, `Precision`
/// means the requested computation cannot be certified at the working
/// precision (retry with more digits), and `Divergence` means an operator
/// series failed to gain valuation because its input violates the hypotheses
/// that make it convergent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// Precondition violation (bad input shape, level mismatch, ...).
    Contract(String),
    /// The answer is not determined at the available precision.
    Precision(String),
    /// An operator/Newton iteration failed to converge.
    Divergence(String),
    /// Valid input, but outside the implemented (desk-scale) range.
    Unsupported(String),
}

impl Error {
    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    pub(crate) fn precision(msg: impl Into<String>) -> Self {
        Error::Precision(msg.into())
    }

    pub(crate) fn divergence(msg: impl Into<String>) -> Self {
        Error::Divergence(msg.into())
    }

    pub(crate) fn unsupported(msg: impl Into<String>) -> Self {
        Error::Unsupported(msg.into())
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Contract(m) => write!(f, "contract violation: {m}"),
            Error::Precision(m) => write!(f, "insufficient precision: {m}"),
            Error::Divergence(m) => write!(f, "non-convergence: {m}"),
            Error::Unsupported(m) => write!(f, "unsupported: {m}"),
        }
    }
}

impl core::error::Error for Error {}
