use thiserror::Error;

/// Errors raised by the simulation and analysis routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("unsupported dimension {0} (expected 2, 4 or 8)")]
    UnsupportedDimension(usize),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not Hermitian (residual {0:e})")]
    NotHermitian(f64),

    #[error("trace is {0}, expected 1")]
    TraceNotOne(f64),

    #[error("matrix is not positive semidefinite (minimum eigenvalue {0:e})")]
    NotPositive(f64),

    #[error("state vector norm is {0}, expected 1")]
    NotNormalized(f64),

    #[error("effect produced probability {0} outside [0, 1]")]
    InvalidEffect(f64),

    #[error("strength {0} is outside [0, 1/2]")]
    InvalidStrength(f64),

    #[error("`{field}` = {value} is not a probability")]
    InvalidProbability { field: &'static str, value: f64 },

    #[error("channel parameters are not symmetric; calibrate until D+0 = D0+ = 1/2 and D1 = D3")]
    CalibrationRequired,

    #[error("probe construction failed: {0}")]
    Construction(String),

    #[error("conditioning on an outcome of probability {0:e}")]
    DegenerateBranch(f64),

    #[error("count {k} is outside 0..={n}")]
    InvalidCount { k: usize, n: usize },

    #[error("enumeration of {0} strings exceeds the budget")]
    TooLarge(f64),

    #[error("{0} checkable shots is too few for the normal approximation (need at least 30)")]
    InsufficientData(usize),

    #[error("posterior mass underflowed to zero")]
    NumericalUnderflow,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("line {line}: missing Bob's private record `{field}`; detection requires Bob's preparation records")]
    MissingPrivateFields { line: usize, field: &'static str },
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_probability(field: &'static str, value: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(Error::InvalidProbability { field, value })
    }
}

pub(crate) fn check_strength(d: f64) -> Result<f64> {
    if (0.0..=0.5).contains(&d) {
        Ok(d)
    } else {
        Err(Error::InvalidStrength(d))
    }
}
