use thiserror::Error;

/// Errors raised by the model and oracle operations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("point ({x}, {y}, {z}) has norm {norm} outside the unit ball")]
    NormExceeded { x: f64, y: f64, z: f64, norm: f64 },

    #[error("the center of the ball has no preferred diameter; an explicit axis is required")]
    DegenerateDecomposition,

    #[error("invalid decomposition: {0}")]
    InvalidDecomposition(String),

    #[error("invalid direction: {0}")]
    InvalidDirection(String),

    #[error("invalid density matrix: {0}")]
    InvalidDensity(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not Hermitian (deviation {0:e})")]
    NonHermitian(f64),

    #[error("invalid state vector: {0}")]
    InvalidStateVector(String),

    #[error("invalid time grid: {0}")]
    InvalidTimeGrid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
