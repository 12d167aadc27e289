//! Error taxonomy shared by every module in the crate.
//!
//! Four failure classes cover everything the library can report:
//! rejected inputs (shape/precondition violations), resource limits
//! (requests that would exhaust memory), integration instabilities
//! (the evolution left the unitary manifold beyond repair), and
//! analysis failures (a fit or detector cannot produce a result).

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Input violates a documented precondition (shape, range, support, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Request would exceed a hard resource cap (e.g. Hilbert dimension).
    #[error("resource limit: {0}")]
    ResourceLimit(String),

    /// The integrator produced frames that cannot be restored to the
    /// unitary manifold; carries the time and patch where it happened.
    #[error("integration instability at t = {t} (patch {patch}): {detail}")]
    Instability { t: f64, patch: usize, detail: String },

    /// A fit or estimator rejected its data.
    #[error("analysis: {0}")]
    Analysis(String),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Shorthand used by validation helpers.
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    /// Shorthand for analysis rejections.
    pub(crate) fn analysis(msg: impl Into<String>) -> Self {
        Error::Analysis(msg.into())
    }
}
