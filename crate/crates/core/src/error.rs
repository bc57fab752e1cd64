use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("empty instance")]
    EmptyInstance,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("insufficient primes: need {needed} in [{lo}, {hi}], found {found}")]
    InsufficientPrimes {
        needed: usize,
        lo: u64,
        hi: u64,
        found: usize,
    },

    #[error("budget exceeded for {what}: {required} > {limit}")]
    BudgetExceeded {
        what: &'static str,
        required: String,
        limit: String,
    },

    #[error("ambiguous extreme pair: {0}")]
    Ambiguous(String),

    #[error("unknown {kind} `{name}`")]
    Unknown { kind: &'static str, name: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
