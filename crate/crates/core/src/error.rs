use thiserror::Error;

/// Errors raised across the estimation pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Invalid configuration (OFDM grid, channel model, scenario file).
    #[error("configuration error: {0}")]
    Config(String),

    /// An argument violates the documented domain of an operation.
    #[error("invalid argument: {0}")]
    Argument(String),

    /// Factorization failed even after the largest diagonal jitter.
    #[error("numerical error: {0}")]
    Numerical(String),

    /// Path detection found no sample above the threshold.
    #[error("correlation estimation failed: no delay sample exceeded the threshold {threshold:.3e}")]
    EstimationFailed { threshold: f64 },

    /// Every candidate in the parameter set failed to evaluate.
    #[error("selection failed: {0}")]
    Selection(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
