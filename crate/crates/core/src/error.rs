use thiserror::Error;

/// Errors raised by the verification toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    Geometry(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("CFL number {cfl:.4} exceeds the limit {limit}")]
    Cfl { cfl: f64, limit: f64 },

    #[error("test field support violates the domain: {0}")]
    Support(String),

    #[error("point (r={r}, t={t}) is within {margin} of a fan edge")]
    NearFanEdge { r: f64, t: f64, margin: f64 },

    #[error("cutoff width eps={eps} too large: boundary collars overlap")]
    CollarOverlap { eps: f64 },

    #[error("invalid sweep: {0}")]
    Sweep(String),
}

pub type Result<T> = std::result::Result<T, Error>;
