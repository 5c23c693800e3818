use thiserror::Error;

/// Errors raised by the counting engine.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid group spec `{0}`: {1}")]
    InvalidGroup(String, String),

    #[error("group of order {order} exceeds the configured bound {bound}")]
    GroupTooLarge { order: u64, bound: u64 },

    #[error("{value} is outside the factorization table range 1..={bound}")]
    OutOfRange { value: u64, bound: u64 },

    #[error("resource limit: {0}")]
    Resource(String),

    #[error("unknown function `{0}`")]
    UnknownFunction(String),

    #[error("invalid function spec `{0}`: {1}")]
    InvalidFunction(String, String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("malformed input: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
