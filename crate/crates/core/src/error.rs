use thiserror::Error;

/// Errors produced by the numerical and model layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument fell outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The integrand or objective produced NaN (or an infinite value where a finite one is required).
    #[error("non-finite value {value} at x = {x}")]
    NonFinite { x: f64, value: f64 },

    /// Adaptive quadrature ran out of budget before meeting its tolerance.
    #[error("quadrature did not converge: best estimate {estimate} (error estimate {error})")]
    NonConvergence { estimate: f64, error: f64 },

    /// A moment integral diverges at the given exponent.
    #[error("moment of order p = {p} diverges: {reason}")]
    Divergent { p: f64, reason: String },

    /// No closed form is known for this input.
    #[error("closed form unavailable for {0}")]
    Unavailable(String),

    /// The combination of families is not supported (e.g. an indicator around a non-monotone part).
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// Every computed norm vanished, so no generating function can be built.
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// A documented precondition of the operation does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Two independent routes to the same quantity disagree.
    #[error("inconsistent results: {0}")]
    Inconsistent(String),

    /// Malformed spec, tail, or table input.
    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(err: serde_json::Error) -> Self {
        Error::Parse(err.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(err: csv::Error) -> Self {
        Error::Parse(err.to_string())
    }
}

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
