use thiserror::Error;

/// Failure classes shared by every module. The CLI maps each class to its own
/// exit code, so the distinction matters beyond the message text.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// Malformed or out-of-range input (bad item name, overlapping initial
    /// allocation, step size above the granularity bound, ...).
    #[error("input error: {0}")]
    Input(String),
    /// An enumeration or oracle cap was exceeded.
    #[error("resource error: {0}")]
    Resource(String),
    /// A caller broke an operation's precondition (e.g. shifting a non-CWE).
    #[error("contract error: {0}")]
    Contract(String),
    /// An internal invariant failed. Always a bug.
    #[error("internal invariant failed: {0}")]
    Internal(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn input<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Input(msg.into()))
}

pub(crate) fn resource<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Resource(msg.into()))
}
