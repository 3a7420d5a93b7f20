use thiserror::Error;

/// Errors raised by the library.
///
/// Precondition failures and budget refusals are kept apart so the CLI can
/// map them onto distinct exit codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: u32, right: u32 },

    #[error("dimension {n} outside supported range {min}..={max}")]
    DimensionOutOfRange { n: u32, min: u32, max: u32 },

    #[error("element {value:#x} does not fit in dimension {n}")]
    ElementOutOfRange { value: u64, n: u32 },

    #[error("empty set not allowed: {0}")]
    EmptySet(&'static str),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("budget exceeded: {needed} > {budget}")]
    BudgetExceeded { needed: String, budget: u64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn pre(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }

    /// Process exit code used by the command line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::BudgetExceeded { .. } => 3,
            Error::Io(_) => 1,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
