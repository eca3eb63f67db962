use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty set")]
    EmptySet,

    #[error("no areas to lay out")]
    NoAreas,

    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("total weight is zero")]
    ZeroTotalWeight,

    #[error("areas sum to {actual}, container area is {expected}")]
    AreaMismatch { expected: f64, actual: f64 },

    #[error("layouts do not share the same leaf ids")]
    IdMismatch,

    #[error("instance too large: n = {n}, limit is {max}")]
    TooLarge { n: usize, max: usize },

    #[error("usage error: {0}")]
    Usage(String),

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
