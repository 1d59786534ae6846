use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{what} = {value} is outside its domain ({expected})")]
    Domain {
        what: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error("operation needs a periodic wave but the family is the black-soliton limit (ee = 0)")]
    SolitonLimit,

    #[error("grid has m = {m}; need an even count of at least {min}")]
    InvalidGrid { m: usize, min: usize },

    #[error("grid period {period} does not fit operator {kind}: {reason}")]
    PeriodMismatch {
        kind: &'static str,
        period: f64,
        reason: &'static str,
    },

    #[error("length mismatch: expected {expected} samples, got {got}")]
    GridMismatch { expected: usize, got: usize },

    #[error("eigensolver failed: {0}")]
    Eigensolver(String),

    #[error("kernel is not one-dimensional: second-smallest |eigenvalue| = {second:e}")]
    DegenerateKernel { second: f64 },

    #[error("input is not admissible: {0}")]
    Admissibility(String),

    #[error("state is outside the modulation tube: {0}")]
    OutsideTube(String),

    #[error("modulation Jacobian is singular")]
    DegenerateFit,

    #[error("linear system is singular: {0}")]
    Singular(&'static str),

    #[error("unknown tag `{0}`")]
    UnknownTag(String),

    #[error("non-finite value detected at step {step}")]
    NonFinite { step: usize },

    #[error("time step too large: dt * kmax^2 = {value} exceeds {limit}")]
    StepTooLarge { value: f64, limit: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(what: &'static str, value: f64, expected: &'static str) -> Error {
    Error::Domain {
        what,
        value,
        expected,
    }
}
