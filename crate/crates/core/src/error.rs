use thiserror::Error;

/// Errors raised by the simulator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InputDomain(String),

    #[error("degenerate loop geometry: {0}")]
    Geometry(String),

    #[error("integration failed: norm drift {norm_drift:.3e} exceeds {limit:.1e}")]
    NumericalFailure { norm_drift: f64, limit: f64 },

    #[error("loop too coarse: overlap {magnitude:.3e} between samples {index} and {next}")]
    LoopTooCoarse {
        index: usize,
        next: usize,
        magnitude: f64,
    },

    #[error("evolution not adiabatic enough: |<psi(0)|psi(L)>| = {overlap:.6}")]
    NotAdiabatic { overlap: f64 },

    #[error("protocol violation: population {leakage:.3e} left the degenerate subspace")]
    ProtocolViolation { leakage: f64 },

    #[error("configuration error at `{key}`: {message}")]
    Configuration { key: String, message: String },
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::InputDomain(msg.into())
    }

    pub(crate) fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Configuration {
            key: key.into(),
            message: message.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
