use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The amplifier denominator vanishes: the spin emission rate equals the
    /// total resonator loss rate and the system oscillates instead of
    /// amplifying.
    #[error("oscillation threshold reached (threshold kappa_s = {threshold_kappa_s:e} rad/s)")]
    OscillationThreshold { threshold_kappa_s: f64 },

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("amplifier gain is zero, input-referred noise undefined")]
    ZeroGain,

    #[error("inconsistent measurement: {0}")]
    InconsistentMeasurement(String),

    #[error("fit did not converge: {0}")]
    NonConvergence(String),

    #[error("feature lies at the edge of the data: {0}")]
    FeatureAtEdge(String),

    /// A gain fit wants a coupling at or above the oscillation threshold.
    #[error("best fit at oscillation threshold boundary (g_threshold = {g_threshold:e} rad/s)")]
    ThresholdBoundary { g_threshold: f64 },

    #[error("fit produced a non-physical width: {0}")]
    NegativeWidth(String),
}

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}
