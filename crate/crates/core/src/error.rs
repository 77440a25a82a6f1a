use thiserror::Error;

/// Errors produced by the simulator.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("signal and pump inverse group velocities coincide; no separable poling length exists")]
    DegenerateMatching,

    #[error("position {z} lies outside the region [0, {length}]")]
    OutOfRange { z: f64, length: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("propagator fails the Bogoliubov gate (residual {residual:.3e} > {tolerance:.1e})")]
    InconsistentPropagator { residual: f64, tolerance: f64 },

    #[error("Schmidt number undefined: all squeezing parameters vanish")]
    UndefinedSchmidtNumber,

    #[error("mode is not unit-normalized (norm² = {norm_sq})")]
    NotNormalized { norm_sq: f64 },

    #[error("input is multimode (K - 1 = {excess:.3e}); use the covariance path")]
    MultimodeInput { excess: f64 },

    #[error("covariance matrix is not physical: {0}")]
    NonPhysical(String),

    #[error("matrix is not symplectic (residual {0:.3e})")]
    NotSymplectic(f64),

    #[error("unpaired squeezing value {0:.6e}")]
    Pairing(f64),

    #[error("pump calibration did not converge after {iterations} iterations (target {target}, reached {reached})")]
    Calibration {
        iterations: usize,
        target: f64,
        reached: f64,
    },

    #[error("config error in `{field}`: {reason}")]
    Config { field: String, reason: String },

    #[error("cache format error: {0}")]
    Cache(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            reason: reason.into(),
        }
    }

    /// True for failures of a numerical gate rather than of the input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Numerical(_)
                | Error::InconsistentPropagator { .. }
                | Error::UndefinedSchmidtNumber
                | Error::MultimodeInput { .. }
                | Error::NonPhysical(_)
                | Error::NotSymplectic(_)
                | Error::Pairing(_)
                | Error::Calibration { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
