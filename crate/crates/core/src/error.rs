use thiserror::Error;

/// Errors raised by geometry construction and the deflection evaluators.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid crystal: {0}")]
    InvalidCrystal(String),

    #[error("invalid beam: {0}")]
    InvalidBeam(String),

    #[error("ring index {index} out of range for {count} rings")]
    RingIndex { index: usize, count: usize },

    #[error("regime violation: {0}")]
    Regime(String),

    #[error("invalid range: {0}")]
    InvalidRange(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("quadrature failed to reach tolerance {tolerance:e} (estimated error {estimate:e})")]
    Quadrature { tolerance: f64, estimate: f64 },

    #[error("trajectory did not leave the crystal within arc length {arc_length}")]
    Orbiting { arc_length: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
