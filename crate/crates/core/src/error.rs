use alloc::string::String;
use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Every failure the core can report.
///
/// Variants map onto the CLI exit codes: everything is a precondition
/// failure (exit 1) except [`Error::InvalidInput`] raised while parsing,
/// which the CLI reports as a usage error.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Argument outside its domain (non-finite coordinate, `r <= 0`, ...).
    InvalidInput(String),
    /// Body cannot be used (degenerate axis, non-positive cross section).
    InvalidBody(String),
    /// An operation's documented precondition does not hold.
    Precondition(String),
    /// Numerical routine did not reach its target tolerance.
    NumericFailure { what: String, achieved: f64, target: f64 },
    /// Work guard exceeded (brute-force box, breakpoint budget, overflow).
    TooLarge { what: String, size: f64, limit: f64 },
    /// Requested variant exists in the model but has no implementation.
    NotImplemented(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn body(msg: impl Into<String>) -> Self {
        Error::InvalidBody(msg.into())
    }

    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }

    pub(crate) fn too_large(what: impl Into<String>, size: f64, limit: f64) -> Self {
        Error::TooLarge { what: what.into(), size, limit }
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidInput(m) => write!(f, "invalid input: {m}"),
            Error::InvalidBody(m) => write!(f, "invalid body: {m}"),
            Error::Precondition(m) => write!(f, "precondition violated: {m}"),
            Error::NumericFailure { what, achieved, target } => write!(
                f,
                "numeric failure in {what}: achieved tolerance {achieved:e}, target {target:e}"
            ),
            Error::TooLarge { what, size, limit } => {
                write!(f, "{what} too large: {size} exceeds limit {limit}")
            }
            Error::NotImplemented(m) => write!(f, "not implemented: {m}"),
        }
    }
}

impl core::error::Error for Error {}
