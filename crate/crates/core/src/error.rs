//! Crate-wide error type.

use alloc::string::String;
use core::fmt;

/// Errors raised by the exact-computation kernels.
///
/// `BudgetExceeded` names the loop whose termination argument the budget
/// guards, so a cap exhaustion is diagnosable and never a silent wrong
/// answer. `Internal` flags a violated postcondition that certified code
/// checked before returning; it always indicates a bug, not bad input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// Operands live in different ambient dimensions.
    DimensionMismatch { expected: usize, got: usize },
    /// Operands were built over different Frobenius bases.
    BaseMismatch { expected: u32, got: u32 },
    /// A cone that must be pointed contains opposite nonzero vectors.
    NotPointed,
    /// A stated precondition does not hold for the given input.
    Precondition(String),
    /// An iteration cap ran out; the payload names the loop.
    BudgetExceeded(String),
    /// A certificate or re-verified identity failed its check.
    VerificationFailed(String),
    /// A pluggable base factorizer declined the input.
    FactorizerFailure(String),
    /// A verified internal invariant failed; always a bug.
    Internal(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
            Error::BaseMismatch { expected, got } => {
                write!(f, "base mismatch: expected c={expected}, got c={got}")
            }
            Error::NotPointed => write!(f, "cone is not pointed"),
            Error::Precondition(msg) => write!(f, "precondition violated: {msg}"),
            Error::BudgetExceeded(which) => write!(f, "iteration budget exceeded in {which}"),
            Error::VerificationFailed(msg) => write!(f, "verification failed: {msg}"),
            Error::FactorizerFailure(msg) => write!(f, "base factorizer failed: {msg}"),
            Error::Internal(msg) => write!(f, "internal invariant violated: {msg}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Error {}

/// Convenience alias used by every fallible operation in the crate.
pub type Result<T> = core::result::Result<T, Error>;
