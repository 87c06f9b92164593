use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid exponent {0}: must lie in [1, inf]")]
    InvalidExponent(f64),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    /// Quadrature or iteration stopped before reaching its tolerance.
    #[error("no convergence in {context}: error estimate {abs_error:e} after {evaluations} evaluations")]
    NonConvergence {
        context: String,
        abs_error: f64,
        evaluations: usize,
    },

    #[error("work budget exceeded: {required} > {budget}")]
    Budget { required: usize, budget: usize },

    #[error("not representable in double precision: {0}")]
    Unrepresentable(String),
}

impl Error {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn pre(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }
}
