use thiserror::Error;

/// Errors raised across the heat-engine analysis.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("level sets are not aligned: {0}")]
    Alignment(String),
    #[error("size limit exceeded: {0}")]
    Size(String),
    #[error("bracket [{low}, {high}] does not straddle the feasibility boundary: {reason}")]
    Bracket { low: f64, high: f64, reason: String },
    #[error("feasibility is not monotone in the battery gap near w = {w}")]
    Monotonicity { w: f64 },
    #[error("invariant violated: {0}")]
    InvariantViolation(String),
    #[error("design conditions failed: {}", .0.join(", "))]
    Design(Vec<String>),
    #[error("unsupported epsilon family: {0}")]
    UnsupportedFamily(String),
    #[error("solver did not converge: {0}")]
    Solver(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
