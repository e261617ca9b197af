use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{name} must be a probability in [0, 1], got {value}")]
    Probability { name: &'static str, value: f64 },

    #[error("uninformative test: sensitivity + specificity must exceed 1, got {se} + {sp}")]
    Uninformative { se: f64, sp: f64 },

    #[error("invalid sample: {0}")]
    Sample(String),

    #[error("alpha must lie in (0, 1), got {0}")]
    Alpha(f64),

    #[error("beta shape parameters must be positive and finite, got ({alpha}, {beta})")]
    Shape { alpha: f64, beta: f64 },

    #[error("{name} = {value} is outside [0, 1]")]
    Domain { name: &'static str, value: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}
