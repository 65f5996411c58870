use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("series did not converge after {terms} terms (z = {z})")]
    NonConvergent { terms: usize, z: f64 },

    #[error("frequency vector is zero; eigenvalue is only defined by continuity")]
    ZeroFrequency,

    #[error("quadrature error estimate {estimate:e} exceeds tolerance {tolerance:e}")]
    AccuracyNotReached { estimate: f64, tolerance: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("mode k = 0 has no parallel/transverse split")]
    ZeroMode,

    #[error("right-hand side has a nonzero mean (k = 0 coefficient {norm:e}); the operator is singular there")]
    SingularMode { norm: f64 },

    #[error("eigenvalue {value:e} at mode {k:?} is numerically zero")]
    DegenerateEigenvalue { k: Vec<i64>, value: f64 },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParams(msg.into())
    }
}
