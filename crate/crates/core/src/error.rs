use thiserror::Error;

use crate::types::Vec4;

/// Errors raised by the library. Variants carry enough context to reproduce the failure.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("step size {h:e} fell below the minimum at s = {s}")]
    StepUnderflow { s: f64, h: f64 },

    #[error("vector field returned a non-finite value at s = {s}")]
    NonFiniteState { s: f64 },

    #[error("step limit of {limit} reached at s = {s}")]
    StepLimit { s: f64, limit: usize },

    #[error("grid too coarse: need {needed} nodes, have {have}")]
    GridTooCoarse { needed: usize, have: usize },

    #[error("operator value at the origin is undefined for this parity")]
    SingularOrigin,

    #[error("seed radius {radius:e} exceeds the cap {cap:e}")]
    SeedTooLarge { radius: f64, cap: f64 },

    #[error("orbit undecided at s = {s_end}; extend the span")]
    UndecidedOrbit { s_end: f64 },

    #[error("invariance violated at s = {s}, witness {witness:?}")]
    InvarianceViolated { s: f64, witness: Vec4 },

    #[error("bound violated: observed {observed} exceeds {bound}")]
    BoundViolated { observed: f64, bound: f64 },

    #[error("insufficient tail: {have} samples, need {needed}")]
    InsufficientTail { have: usize, needed: usize },

    #[error("target {target} not reached on the orbit (largest |phi1| seen: {reached})")]
    TargetUnreachableOnOrbit { target: f64, reached: f64 },

    #[error("quadrature did not converge: estimate {estimate:e}, tolerance {tol:e}")]
    QuadratureNotConverged { estimate: f64, tol: f64 },

    #[error("incompatible data: {0}")]
    IncompatibleData(String),

    #[error("malformed input: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
