//! Crate-wide error type.

use std::fmt;

/// Errors produced by the simulation operations.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An input violated a documented precondition (non-finite value,
    /// negative rate, coupling larger than total loss, ...).
    InvalidParameter(String),
    /// The coupled-mode evolution matrix is numerically singular; reachable
    /// only for exactly lossless, exactly resonant degenerate drives.
    SingularSystem { det_magnitude: f64 },
    /// Requested integration step exceeds the stability guard.
    StepTooLarge { step: f64, limit: f64 },
    /// Frequency outside the validity window of a dispersion profile.
    OutOfWindow { omega: f64, window: (f64, f64) },
    /// A fit or classification was asked for with too little data; the
    /// message states the required coverage.
    InsufficientData(String),
    /// The feasible region of an optimization problem is empty.
    Infeasible(String),
    /// A text input failed to parse; `line` is 1-based.
    Parse { line: usize, message: String },
    /// A histogram was requested for a channel with no events.
    UnknownChannel(u32),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidParameter(msg) => write!(f, "invalid parameter: {msg}"),
            Error::SingularSystem { det_magnitude } => write!(
                f,
                "singular coupled-mode system (|det M| = {det_magnitude:.3e})"
            ),
            Error::StepTooLarge { step, limit } => write!(
                f,
                "integration step {step:.3e} exceeds stability limit {limit:.3e} roundtrips"
            ),
            Error::OutOfWindow { omega, window } => write!(
                f,
                "angular frequency {omega:.6e} rad/s outside validity window [{:.6e}, {:.6e}]",
                window.0, window.1
            ),
            Error::InsufficientData(msg) => write!(f, "insufficient data: {msg}"),
            Error::Infeasible(msg) => write!(f, "infeasible: {msg}"),
            Error::Parse { line, message } => write!(f, "parse error at line {line}: {message}"),
            Error::UnknownChannel(ch) => write!(f, "no events on channel {ch}"),
        }
    }
}

impl std::error::Error for Error {}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn ensure_finite(value: f64, what: &str) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::InvalidParameter(format!(
            "{what} must be finite, got {value}"
        )))
    }
}
