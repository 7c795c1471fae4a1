use thiserror::Error;

/// Errors raised by mesh construction, discretisation, estimation and the driver.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid configuration: {0}")]
    InvalidConfiguration(String),

    /// A state left the declared compact set `[lo, hi]`.
    #[error("state {value} at {location} left the admissible set [{lo}, {hi}]")]
    StateSpaceViolation {
        value: f64,
        lo: f64,
        hi: f64,
        location: String,
    },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("linear solve failed: {0}")]
    SingularOperator(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
