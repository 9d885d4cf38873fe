use thiserror::Error;

use crate::model::Class;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("training data has no records of class {0}")]
    EmptyClass(Class),

    #[error("bin {bin} has no records of class {class} and smoothing is disabled")]
    ZeroBin { bin: usize, class: Class },

    #[error("dataset `{0}` is empty")]
    EmptyDataset(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("root finder did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("likelihood ratio is constant on the target support")]
    DegenerateLambda,

    #[error("class-conditional densities coincide; debiasing factor is 1")]
    DegenerateOverlap,

    #[error("extended measure is not normalised: prior mass {found} vs requested {expected}")]
    NotNormalized { expected: f64, found: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
