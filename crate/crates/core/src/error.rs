use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeoError {
    #[error("parse error at {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("unknown identifier '{name}' at {pos}")]
    UnknownIdent { pos: usize, name: String },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("no convergence: {0}")]
    NoConvergence(String),
    #[error("degenerate: {0}")]
    Degenerate(String),
    #[error("classification mismatch: {0}")]
    Mismatch(String),
    #[error("insufficient samples: {got} in window (need {need})")]
    InsufficientSamples { got: usize, need: usize },
    #[error("io: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, GeoError>;

impl From<std::io::Error> for GeoError {
    fn from(e: std::io::Error) -> Self {
        GeoError::Io(e.to_string())
    }
}
