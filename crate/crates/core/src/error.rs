use thiserror::Error;

/// Errors raised by the numerical kernels and the scenario layer.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("field length {got} does not match grid node count {expected}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("field is diverged or contains non-finite values")]
    Diverged,

    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("hypothesis violated: {0}")]
    Hypothesis(#[from] HypothesisError),

    #[error("config error at line {line}, key `{key}`: {message}")]
    Config {
        line: usize,
        key: String,
        message: String,
    },

    #[error("trace parse error at line {line}: {message}")]
    TraceFormat { line: usize, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

/// A violated admissibility hypothesis on scenario data.
///
/// Each variant names the sign condition or hypothesis it guards so
/// that config validation can report what failed, not just that it failed.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum HypothesisError {
    #[error("s_wall must be <= 0 (wall sign condition); got {value} at t = {t}")]
    WallSourcePositive { t: f64, value: f64 },

    #[error("s_far must be <= 0 (far-field sign condition); got {value} at t = {t}")]
    FarSourcePositive { t: f64, value: f64 },

    #[error("s0 must be <= 0 pointwise (maximum-principle hypothesis for s); got {value} at y = {y}")]
    InitialSourcePositive { y: f64, value: f64 },

    #[error("a0 = w0 + C_E erf(y/2) must be > 0 on interior nodes (positivity hypothesis for the lifted field); got {value} at y = {y}")]
    LiftedDataNotPositive { y: f64, value: f64 },

    #[error("w0(0) must vanish (wall condition of the w equation); got {value}")]
    WallVelocityIncompatible { value: f64 },

    #[error("s0(0) must equal s_wall(0) (initial compatibility); got s0(0) = {s0}, s_wall(0) = {wall}")]
    WallSourceIncompatible { s0: f64, wall: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
