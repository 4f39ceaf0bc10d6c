use thiserror::Error;

/// Errors raised while building or evaluating problem instances.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    /// Two particles closer than the evaluation cutoff.
    #[error("coincident particles {i} and {j} (r = {r:e})")]
    Coincident { i: usize, j: usize, r: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("points from different instances: {0:?} and {1:?}")]
    MixedLabels(String, String),

    #[error("enumeration of {count} points exceeds cap {cap}")]
    CapExceeded { count: u128, cap: u128 },

    #[error("exponent overflow in exponential encoding")]
    Overflow,
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_point(x: &[f64], n: usize) -> Result<()> {
    if x.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: x.len(),
        });
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("input point"));
    }
    Ok(())
}

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidParameter(msg.into()))
}
