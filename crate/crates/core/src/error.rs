use thiserror::Error;

use crate::network::BusId;

pub type Result<T> = std::result::Result<T, Error>;

/// Every failure the library can report. Each variant maps onto one stable
/// machine-readable code and one process exit code (see [`Error::code`]).
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("file not found: {0}")]
    NotFound(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("validation error: {0}")]
    Validation(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("penetration {target} unreachable: {reason}")]
    InfeasiblePenetration { target: f64, reason: String },
    #[error("equilibrium solve did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("numerical blow-up at t = {time} s: |freq_dev| = {value} Hz at bus {bus}")]
    NumericalBlowup { time: f64, bus: BusId, value: f64 },
    #[error("invalid disturbance: {0}")]
    InvalidDisturbance(String),
    #[error("unknown sensor bus {0}")]
    UnknownSensorBus(BusId),
    #[error("threshold never crossed at bus {0}")]
    NoCrossing(BusId),
    #[error("insufficient baseline before event at bus {0}")]
    InsufficientBaseline(BusId),
    #[error("too few arrivals: {found} usable, {required} required")]
    TooFewArrivals { found: usize, required: usize },
    #[error("no samples to interpolate")]
    EmptySamples,
    #[error("degenerate field: {0}")]
    DegenerateField(String),
    #[error("time {0} s outside trace coverage")]
    TimeOutOfRange(f64),
    #[error("insufficient valid cells: {found} (need {required})")]
    InsufficientCells { found: usize, required: usize },
    #[error("zero variance in {0}; correlation undefined")]
    ZeroVariance(String),
    #[error("region '{0}' has no valid cells")]
    EmptyRegion(String),
}

impl Error {
    /// Stable upper-case identifier printed by the CLI.
    pub fn code(&self) -> &'static str {
        match self {
            Error::NotFound(_) => "NOT_FOUND",
            Error::Io(_) => "IO",
            Error::Parse(_) => "PARSE",
            Error::Validation(_) => "VALIDATION",
            Error::InvalidParameter(_) => "INVALID_PARAMETER",
            Error::Config(_) => "CONFIG",
            Error::InfeasiblePenetration { .. } => "INFEASIBLE_PENETRATION",
            Error::NoConvergence { .. } => "NO_CONVERGENCE",
            Error::NumericalBlowup { .. } => "NUMERICAL_BLOWUP",
            Error::InvalidDisturbance(_) => "INVALID_DISTURBANCE",
            Error::UnknownSensorBus(_) => "UNKNOWN_SENSOR_BUS",
            Error::NoCrossing(_) => "NO_CROSSING",
            Error::InsufficientBaseline(_) => "INSUFFICIENT_BASELINE",
            Error::TooFewArrivals { .. } => "TOO_FEW_ARRIVALS",
            Error::EmptySamples => "EMPTY_SAMPLES",
            Error::DegenerateField(_) => "DEGENERATE_FIELD",
            Error::TimeOutOfRange(_) => "TIME_OUT_OF_RANGE",
            Error::InsufficientCells { .. } => "INSUFFICIENT_CELLS",
            Error::ZeroVariance(_) => "ZERO_VARIANCE",
            Error::EmptyRegion(_) => "EMPTY_REGION",
        }
    }

    /// Process exit code. Codes are distinct per variant; 0 and 1 are reserved
    /// for success and argument-parsing failures respectively.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NotFound(_) => 2,
            Error::Io(_) => 3,
            Error::Parse(_) => 4,
            Error::Validation(_) => 5,
            Error::InvalidParameter(_) => 6,
            Error::Config(_) => 7,
            Error::InfeasiblePenetration { .. } => 8,
            Error::NoConvergence { .. } => 9,
            Error::NumericalBlowup { .. } => 10,
            Error::InvalidDisturbance(_) => 11,
            Error::UnknownSensorBus(_) => 12,
            Error::NoCrossing(_) => 13,
            Error::InsufficientBaseline(_) => 14,
            Error::TooFewArrivals { .. } => 15,
            Error::EmptySamples => 16,
            Error::DegenerateField(_) => 17,
            Error::TimeOutOfRange(_) => 18,
            Error::InsufficientCells { .. } => 19,
            Error::ZeroVariance(_) => 20,
            Error::EmptyRegion(_) => 21,
        }
    }

    pub(crate) fn io(path: &std::path::Path, err: std::io::Error) -> Self {
        if err.kind() == std::io::ErrorKind::NotFound {
            Error::NotFound(path.display().to_string())
        } else {
            Error::Io(format!("{}: {}", path.display(), err))
        }
    }
}
