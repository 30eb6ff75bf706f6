use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// The adaptive estimator ran out of subdivision levels before meeting
    /// its tolerance. Carries the best estimate it had.
    #[error("quadrature did not converge: estimate {estimate}, achieved error {achieved:e}")]
    NonConvergence { estimate: Complex64, achieved: f64 },
    #[error("degenerate region: area is zero")]
    DegenerateRegion,
    #[error("invalid polygon: {0}")]
    InvalidPolygon(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("unsupported parameters: {0}")]
    UnsupportedParams(String),
    #[error("resolution mismatch: {0}")]
    ResolutionMismatch(String),
    #[error("the origin is not an admissible evaluation point")]
    OriginNotAllowed,
}

pub type Result<T> = std::result::Result<T, Error>;
