//! Crate-wide error type.

/// Errors produced by the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A caller-supplied value violates a precondition (non-finite input,
    /// non-positive step size, dimension mismatch, bad parameter).
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// An iterate left the admissible region: a component became non-finite
    /// or the iterate norm crossed the divergence threshold.
    #[error("diverged at iteration {step}: norm {norm:e}")]
    Diverged { step: u64, norm: f64 },

    /// A diagnostic needs a problem constant that the problem does not carry.
    #[error("missing constant: {0}")]
    MissingConstant(&'static str),

    /// A bound was requested outside the hypotheses under which it holds.
    #[error("hypothesis violated: {0}")]
    HypothesisViolation(String),

    /// A curve fit cannot be performed on the given data.
    #[error("fit domain error: {0}")]
    FitDomain(String),

    /// A schedule or run description is internally inconsistent.
    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
