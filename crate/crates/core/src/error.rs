use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A physical or numerical parameter is outside its admissible range.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// The pulse protocol could not be carried out as configured.
    #[error("protocol error: {0}")]
    Protocol(String),

    /// Population reached the top of the truncated rotational basis.
    #[error(
        "basis truncation too small: population {population:.3e} within 4 of the cutoff {cutoff} (increase the cutoff)"
    )]
    Truncation { cutoff: u32, population: f64 },

    /// The adaptive integrator gave up.
    #[error("integrator failure at t = {t:.6e} (last accepted step {step:.3e}): {reason}")]
    Integrator { t: f64, step: f64, reason: String },

    #[error("dimension mismatch: expected {expected}, got {found}")]
    Dimension { expected: usize, found: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Parameter(msg.into()))
}
