use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Every failure the numerical core can report.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("nodal point: density {density:e} at or below floor")]
    NodalPoint { density: f64 },
    #[error("integrator step failure at t = {t}: {reason}")]
    StepFailure { t: f64, reason: &'static str },
    #[error("sampling box acceptance rate {rate:e} below 1e-4")]
    SamplingBox { rate: f64 },
    #[error("quadrature did not converge: error estimate {estimate:e} above tolerance {tolerance:e}")]
    Quadrature { estimate: f64, tolerance: f64 },
    #[error("wave packets overlap: overlap mass {mass:e}")]
    Overlap { mass: f64 },
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
}

/// Coarse classification used to map failures onto process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Numeric,
    Precondition,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::StepFailure { .. } | Error::Quadrature { .. } => ErrorClass::Numeric,
            _ => ErrorClass::Precondition,
        }
    }

    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }
}
