use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An operand failed a documented precondition (shape, Hermiticity, ...).
    #[error("contract violation: {0}")]
    ContractViolation(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A rate table was evaluated outside its sampled domain.
    #[error("time {t} outside rate table domain [{start}, {end}]")]
    OutsideTableDomain { t: f64, start: f64, end: f64 },

    #[error("time {t} is not on the grid (dt = {dt})")]
    OffGrid { t: f64, dt: f64 },

    /// The map at `t` cannot be inverted reliably.
    #[error("map at t = {t} is not bijective (condition number {condition:e})")]
    NonBijective { t: f64, condition: f64 },

    #[error("jump probability {probability} exceeds cap {cap}; use a finer grid")]
    ProbabilityCapExceeded { probability: f64, cap: f64 },

    #[error("measurement outcome has vanishing probability {probability:e}")]
    ZeroProbabilityOutcome { probability: f64 },

    #[error("eigensolver did not converge after {sweeps} sweeps")]
    NotConverged { sweeps: usize },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
