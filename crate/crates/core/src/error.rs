use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("value {value} is outside the domain: {endpoint}")]
    Domain { value: f64, endpoint: String },

    #[error("coordinate {0} is not available for this geometry")]
    Coordinate(String),

    #[error("finite-difference stencil does not fit: {0}")]
    Stencil(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid curvature family: {0}")]
    InvalidFamily(String),

    #[error("integrator failed at t = {t}: {reason}")]
    Integrator { t: f64, reason: String },

    #[error("fit did not converge: {0}")]
    Fit(String),

    #[error("quadrature failed: {0}")]
    Quadrature(String),

    #[error("shooting failed: {0}")]
    Shooting(String),
}

pub type Result<T> = std::result::Result<T, Error>;
