use alloc::string::String;

/// Errors raised by every fallible operation in the crate.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// Malformed input text; `line` is 1-based.
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    /// Input parsed but violates a structural invariant (cycle, duplicate
    /// token, missing root, ...).
    #[error("structural error: {0}")]
    Structural(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("alignment error: {0}")]
    Alignment(String),
    /// A caller broke an operation's precondition.
    #[error("contract violation: {0}")]
    Contract(String),
    /// Training produced a non-finite loss.
    #[error("non-finite loss at step {step}")]
    NonFinite { step: usize },
    /// The requested statistic has no defined value for this input.
    #[error("undefined result: {0}")]
    Undefined(String),
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}
