use thiserror::Error;

/// Errors raised by spike-train construction, simulation and the experiment harness.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("non-finite value in {what}: {value}")]
    NonFinite { what: &'static str, value: f64 },

    #[error("unsupported: {0}")]
    Unsupported(&'static str),

    #[error(
        "grid too coarse: spikes at t={first} and t={second} fall into the same cell of width {dt}"
    )]
    Resolution { first: f64, second: f64, dt: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid input: {0}")]
    Validation(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn ensure_finite(what: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonFinite { what, value })
    }
}
