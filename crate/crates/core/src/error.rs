use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An operation was called with arguments outside its contract.
    #[error("usage error: {0}")]
    Usage(String),

    /// A jet or sample contained NaN or an infinity.
    #[error("non-finite value: {0}")]
    NonFinite(String),

    /// The argument lies outside the domain of the map.
    #[error("outside the domain (margin {margin:e}): {what}")]
    Domain { what: String, margin: f64 },

    /// A root or extremum search came up empty.
    #[error("not found: {0}")]
    NotFound(String),

    /// The outer function has no point where the relevant derivative is nonzero.
    #[error("no usable t0: {0}")]
    NoUsableT0(String),

    /// The requested frequency is beyond what double precision supports here.
    #[error("exceeds precision budget: required m = {required} > {budget}")]
    PrecisionBudget { required: u64, budget: u64 },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn usage<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Usage(msg.into()))
}
