use thiserror::Error;

/// Errors produced by the geometry kernels.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Malformed input: wrong dimension, non-unit direction, point off the boundary.
    #[error("invalid input: {0}")]
    Input(String),

    /// A parameter outside the admissible range of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The query is not defined for this kind of body.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// The query is ambiguous at this point (e.g. a polygon vertex).
    #[error("ambiguous query: {0}")]
    Ambiguous(String),

    /// An iterative method failed to reach its tolerance.
    #[error("numeric failure: {message} (bracket [{lo}, {hi}])")]
    Numeric { message: String, lo: f64, hi: f64 },

    /// A construction produced an empty or degenerate result.
    #[error("degenerate result: {0}")]
    Degenerate(String),

    /// The matrix Q failed the positive-definiteness hypothesis.
    #[error("Q not positive definite: det(Q) = {det}")]
    NotPositiveDefinite { det: f64 },

    /// An internal consistency check failed.
    #[error("internal consistency error: {0}")]
    Consistency(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn unsupported(msg: impl Into<String>) -> Self {
        Error::Unsupported(msg.into())
    }

    /// True for errors caused by the caller's input rather than by numerics.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Input(_) | Error::Domain(_) | Error::Unsupported(_) | Error::Ambiguous(_)
        )
    }
}
