use thiserror::Error;

/// Errors raised by the solver pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// The equal-rate sphere does not reach the ground plane.
    #[error("sphere radius {radius} m is below the waveguide height {height} m")]
    InfeasibleSphere { radius: f64, height: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("unsupported outage threshold {0}: expected 0 < eps <= 0.5")]
    UnsupportedThreshold(f64),

    #[error("antenna position {x_pin} m outside the waveguide [0, {length}] m")]
    PositionOutOfRange { x_pin: f64, length: f64 },

    /// Solver failure inside a sweep, with the realization that triggered it.
    #[error("{scheme} scheme failed at {variable}={value}, realization {realization}: {source}")]
    Sweep {
        scheme: String,
        variable: String,
        value: f64,
        realization: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("mismatched sweep records: {0}")]
    MismatchedRecords(String),
}

impl Error {
    /// True for errors caused by bad inputs rather than by a solver failure.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidConfig(_) | Error::UnsupportedThreshold(_) | Error::PositionOutOfRange { .. }
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
