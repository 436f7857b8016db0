use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("size mismatch: {left} vs {right} points")]
    SizeMismatch { left: usize, right: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("function `{function}` has no derivative oracle of order {order}")]
    MissingDerivative { function: String, order: usize },

    #[error("summand `{summand}` (index {index}) has no {what}")]
    MissingMoment {
        summand: String,
        index: usize,
        what: String,
    },

    #[error("law is not centered: mean {mean}")]
    NotCentered { mean: f64 },

    #[error("law has negative support point {0}")]
    NegativeSupport(f64),

    #[error("unknown family `{name}`; available: {available}")]
    UnknownFamily { name: String, available: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}
