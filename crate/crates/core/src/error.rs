use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    /// Pump and Stokes amplitudes are both zero, so the mixing angle and the
    /// bright/dark eigenbasis are undefined.
    #[error("degenerate pulse: Ω_p = Ω_s = 0")]
    DegeneratePulse,

    #[error("norm drift {drift:.3e} at t = {t} exceeds {limit:.0e}; reduce dt")]
    NormDrift { t: f64, drift: f64, limit: f64 },

    #[error("trace drift {drift:.3e} at t = {t} exceeds {limit:.0e}; reduce dt")]
    TraceDrift { t: f64, drift: f64, limit: f64 },

    #[error("invalid quantum state: {0}")]
    InvalidState(String),

    #[error("trajectory has no samples")]
    EmptyTrajectory,
}

impl Error {
    /// True for failures raised while integrating, as opposed to bad input.
    pub fn is_integration_failure(&self) -> bool {
        matches!(self, Error::NormDrift { .. } | Error::TraceDrift { .. })
    }
}
