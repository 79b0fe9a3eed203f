use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("singular matrix: pivot {index} has magnitude {value:e}")]
    SingularMatrix { index: usize, value: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("entry ({row}, {col}) lies outside the band (kl={kl}, ku={ku})")]
    OutsideBand {
        row: usize,
        col: usize,
        kl: usize,
        ku: usize,
    },

    #[error("point x={x} lies outside the domain [{a}, {b}]")]
    OutsideDomain { x: f64, a: f64, b: f64 },

    #[error("solution diverged at t={t} (step {step})")]
    Divergence { t: f64, step: usize },

    #[error("relative change undefined for zero reference value")]
    ZeroReference,

    #[error("config error at key `{key}`: {reason}")]
    Config { key: String, reason: String },

    #[error("malformed CSV at line {line}: {reason}")]
    Csv { line: usize, reason: String },

    #[error("I/O error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
