use thiserror::Error;

/// Errors raised by operator construction, certification and the solver.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// The coupling has no nonzero component, so no finite certificate exists.
    #[error("degenerate coupling: {0}")]
    DegenerateCoupling(String),

    /// A sampled check of a structural hypothesis (symmetry, positivity) failed.
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("power iteration did not converge after {iterations} iterations (last estimate {estimate})")]
    NotConverged { iterations: usize, estimate: f64 },

    /// A resolvent oracle returned a malformed value.
    #[error("resolvent oracle failed on block {block}: {reason}")]
    Oracle { block: usize, reason: String },

    #[error("invalid solver configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
