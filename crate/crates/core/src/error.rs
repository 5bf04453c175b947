//! Error types shared across the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("invalid pulse: {0}")]
    InvalidPulse(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("non-finite input: {name} = {value}")]
    NonFinite { name: &'static str, value: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Quadrature or integrator did not reach the requested tolerance.
    /// `achieved` is the best error estimate obtained.
    #[error("convergence failure in {context}: achieved {achieved:.3e}, required {required:.3e}")]
    Convergence {
        context: &'static str,
        achieved: f64,
        required: f64,
    },

    #[error("no bracketing interval found for target {target}")]
    NoBracket { target: f64 },

    #[error("insufficient k-resolution: {0}")]
    KResolution(String),

    #[error("full-model norm drift {drift:.3e} exceeds {limit:.3e}")]
    NormDrift { drift: f64, limit: f64 },

    #[error("detection coordinate {x_detect} lies outside the numerically significant region")]
    DetectionOutOfRange { x_detect: f64 },
}
