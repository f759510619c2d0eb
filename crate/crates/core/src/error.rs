use thiserror::Error;

/// Errors raised by the simulation engines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain where the operation is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// Vector lengths disagree with the system size.
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    /// The tapping oracle was scheduled while the target was away from equilibrium.
    #[error(
        "tap at t = {time} with target displacement {displacement:e} above tolerance {tolerance:e}"
    )]
    TapTiming {
        time: f64,
        displacement: f64,
        tolerance: f64,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
