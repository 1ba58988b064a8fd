use thiserror::Error;

/// Errors raised by the deformed-algebra computations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("level {level} is outside the level cap {cap}")]
    LevelCap { level: usize, cap: usize },

    #[error("invalid deformation spec: {0}")]
    InvalidSpec(String),

    #[error("operation `{op}` does not support deformation kind `{kind}`")]
    UnsupportedKind { op: &'static str, kind: &'static str },

    #[error("incompatible operands: {0}")]
    Incompatible(String),

    /// The ladder function vanishes (or turns negative) at `level`, so the
    /// deformation cannot be inverted there.
    #[error("degenerate deformation at level {level}: F({level}) = {value} is not strictly positive")]
    Degenerate { level: usize, value: f64 },

    #[error("invalid phase-space grid: {0}")]
    InvalidGrid(String),

    #[error("invalid density: {0}")]
    InvalidDensity(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("json: {0}")]
    Json(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
