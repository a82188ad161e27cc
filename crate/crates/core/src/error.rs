//! Error type shared by every module of the crate.

use thiserror::Error;

/// Failures reported by the numerical routines and the file front end.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is {0}x{1}, expected a square matrix")]
    NonSquare(usize, usize),
    #[error("non-finite entry encountered in {0}")]
    NonFinite(&'static str),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix is not positive semidefinite (min eigenvalue {0:e})")]
    NotPsd(f64),
    #[error("matrix is not a rank-one orthogonal projection (residual {0:e})")]
    NotProjection(f64),
    #[error("vector is not a unit vector (norm {0})")]
    NotUnit(f64),
    #[error("Schmidt rank {s} outside 1..={max}")]
    BadSchmidtRank { s: usize, max: usize },
    #[error("gamma grid is empty or contains non-positive values")]
    EmptyGrid,
    #[error("map is not in the face: residual {0:e}")]
    NotInFace(f64),
    #[error("map is zero")]
    ZeroMap,
    #[error("seed does not satisfy the eigen-relation (residual {0:e})")]
    InvalidSeed(f64),
    #[error("method unavailable: {0}")]
    MethodUnavailable(String),
    #[error("parallelogram identity violated at pair {pair}: residual {residual:e}")]
    IdentityViolated { pair: String, residual: f64 },
    #[error("tabulation is missing the value at {0}")]
    MissingSample(String),
    #[error("invalid parameters: {0}")]
    BadParams(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;
