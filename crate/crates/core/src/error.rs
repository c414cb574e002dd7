use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("blockwise solve requires g_prime = 0 (got {0})")]
    NotIntegrable(f64),

    #[error("eigensolver did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("truncation did not converge below n_max = {cap} (last energy change {delta:e})")]
    TruncationNotConverged { cap: usize, delta: f64 },

    #[error("point outside the domain r^2 < {limit} (r^2 = {r2})")]
    OutsideDomain { r2: f64, limit: f64 },

    #[error("not a fixed point: |rhs| = {0:e}")]
    NotFixedPoint(f64),

    #[error("integration step underflow at t = {t} (state {state:?})")]
    StepUnderflow { t: f64, state: [f64; 4] },

    #[error("energy drift {drift:e} exceeds tolerance {tol:e}")]
    EnergyDrift { drift: f64, tol: f64 },

    #[error("grid is not azimuthally symmetric (variation {0:e}); use peak finding instead")]
    NotAzimuthal(f64),

    #[error("degenerate grid: {0}")]
    DegenerateGrid(String),

    #[error("at lambda = {lambda}: {source}")]
    AtLambda { lambda: f64, source: Box<Error> },

    #[error("empty input: {0}")]
    Empty(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;
