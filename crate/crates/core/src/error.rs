use thiserror::Error;

/// Errors raised by the geometric kernels.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Focal constants must satisfy `lambda1 <= lambda2 <= lambda3`.
    #[error("focal constants must be nondecreasing, got ({0}, {1}, {2})")]
    Unordered(f64, f64, f64),

    #[error("focal constants must be finite")]
    NonFinite,

    /// The operation needs three distinct focal constants.
    #[error("operation requires strictly ordered focal constants")]
    DegenerateTriple,

    /// A coordinate lies outside (or on the boundary of) its admissible range.
    #[error("domain error: {0}")]
    Domain(String),

    /// The point touches a singular locus of the potential or the connection.
    #[error("singular point: {0}")]
    Singular(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    /// An integration produced a non-finite state.
    #[error("non-finite state at t = {t}")]
    NonFiniteState { t: f64 },

    #[error("step size underflow at t = {t}")]
    StepUnderflow { t: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn singular(msg: impl Into<String>) -> Error {
    Error::Singular(msg.into())
}
