use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("field mismatch: {0}")]
    FieldMismatch(String),
    #[error("division by zero in finite field")]
    ZeroInverse,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix is singular")]
    Singular,
    #[error("budget exceeded: {what} needs {needed}, limit is {limit}")]
    BudgetExceeded {
        what: String,
        needed: String,
        limit: String,
    },
    #[error("invalid network: {0}")]
    InvalidNetwork(String),
    #[error("unknown edge id {0}")]
    UnknownEdge(usize),
    #[error("decode failed at receiver {0}")]
    DecodeFailed(usize),
    #[error("io error: {0}")]
    Io(String),
    #[error("malformed input: {0}")]
    Malformed(String),
}

impl Error {
    pub fn budget(what: impl Into<String>, needed: impl ToString, limit: impl ToString) -> Self {
        Error::BudgetExceeded {
            what: what.into(),
            needed: needed.to_string(),
            limit: limit.to_string(),
        }
    }

    pub fn is_budget(&self) -> bool {
        matches!(self, Error::BudgetExceeded { .. })
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Malformed(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
