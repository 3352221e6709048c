use std::fmt;

use maser_core::{AngularFrequency, Error};

/// Process exit codes.
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_THRESHOLD: i32 = 3;
pub const EXIT_NON_CONVERGENCE: i32 = 4;
pub const EXIT_INCONSISTENT: i32 = 5;
/// Output could not be written.
pub const EXIT_IO: i32 = 1;

#[derive(Debug)]
pub enum CliError {
    /// Bad config, schema or input data.
    Config(String),
    Core(Error),
    /// The configured operating point is at or beyond oscillation threshold.
    Threshold(String),
    Output(String),
}

pub type CliResult<T> = Result<T, CliError>;

pub fn config<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(CliError::Config(msg.into()))
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Output(_) => EXIT_IO,
            CliError::Threshold(_) => EXIT_THRESHOLD,
            CliError::Core(e) => match e {
                Error::InvalidInput(_) | Error::ZeroGain => EXIT_CONFIG,
                Error::OscillationThreshold { .. } | Error::ThresholdBoundary { .. } => EXIT_THRESHOLD,
                Error::NonConvergence(_)
                | Error::FeatureAtEdge(_)
                | Error::NegativeWidth(_)
                | Error::Quadrature(_) => EXIT_NON_CONVERGENCE,
                Error::InconsistentMeasurement(_) => EXIT_INCONSISTENT,
            },
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Output(m) => write!(f, "output error: {m}"),
            CliError::Threshold(m) => write!(f, "oscillation threshold: {m}"),
            // rates are reported in Hz at the command line
            CliError::Core(Error::OscillationThreshold { threshold_kappa_s }) => write!(
                f,
                "oscillation threshold: kappa_s reaches kappa_e + kappa_i = {} Hz",
                AngularFrequency(*threshold_kappa_s).hz()
            ),
            CliError::Core(Error::ThresholdBoundary { g_threshold }) => write!(
                f,
                "gain fit hits the oscillation threshold: g_ens would reach {} Hz",
                AngularFrequency(*g_threshold).hz()
            ),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}
