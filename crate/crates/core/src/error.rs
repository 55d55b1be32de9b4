//! Crate-wide error types.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("invalid grid: {0}")]
    Grid(String),

    #[error("invalid parameter `{key}`: {message}")]
    Parameter { key: String, message: String },

    #[error("symbol evaluates to a non-finite value at a retained mode (|xi| = {ximag})")]
    NonFiniteSymbol { ximag: f64 },

    #[error("blow-up guard tripped at t = {t}: L2 norm grew by {growth:.3}x in one step")]
    BlowUp { t: f64, growth: f64 },

    #[error("Picard iteration diverged: increment grew twice in a row at iterate {iterate}")]
    PicardDiverged { iterate: usize },

    #[error("quadrature did not converge: {0}")]
    QuadratureNonConvergence(String),

    #[error("need at least {need} time samples, got {got}")]
    TooFewSamples { need: usize, got: usize },

    #[error("{0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, LabError>;

impl LabError {
    pub fn parameter(key: &str, message: impl Into<String>) -> Self {
        LabError::Parameter {
            key: key.to_string(),
            message: message.into(),
        }
    }
}
