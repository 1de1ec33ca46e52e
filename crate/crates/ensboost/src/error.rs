//! Error type shared across the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Array or network dimensions do not line up.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// Invalid or inconsistent configuration.
    #[error("config error: {0}")]
    Config(String),

    /// Malformed on-disk artifact. `offset` is the byte position at which
    /// the problem was detected.
    #[error("format error at byte {offset}: {msg}")]
    Format { offset: u64, msg: String },

    /// Inputs are structurally valid but unusable (grid/calendar mismatch,
    /// member-id clash, empty region, ...).
    #[error("data error: {0}")]
    Data(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// Non-finite values appeared during training or model evaluation.
    #[error("numerical divergence: {0}")]
    Divergence(String),

    /// Covariance factorization failed after jitter escalation.
    #[error("conditioning error: {0}")]
    Conditioning(String),

    /// A threshold composite selected zero samples.
    #[error("empty composite: 0 samples {0} the threshold")]
    EmptyComposite(String),

    /// A statistic is undefined on the given input (e.g. correlation of a
    /// zero-variance map).
    #[error("undefined statistic: {0}")]
    Undefined(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code: 0 success, 2 config, 3 data, 4 divergence.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 2,
            Error::Shape(_)
            | Error::Format { .. }
            | Error::Data(_)
            | Error::InsufficientData(_)
            | Error::EmptyComposite(_)
            | Error::Undefined(_)
            | Error::Io(_) => 3,
            Error::Divergence(_) | Error::Conditioning(_) => 4,
        }
    }
}
