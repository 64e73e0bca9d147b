use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid problem: {0}")]
    InvalidSpec(String),

    #[error("exponent tuple sums to {actual}, expected degree {expected}")]
    DegreeMismatch { expected: usize, actual: usize },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("system is not square: N = {equations} equations but k(n+r) = {unknowns} unknowns")]
    NonSquare { equations: usize, unknowns: usize },

    #[error("singular system (pivot {pivot:.3e} below threshold {threshold:.3e})")]
    Singular { pivot: f64, threshold: f64 },

    #[error("k = {k} is not sub-generic (expected generic rank g = {g})")]
    NotSubGeneric { k: usize, g: usize },

    #[error("{0} is not prime")]
    NotPrime(u64),

    #[error("invalid tracker options: {0}")]
    TrackOptions(String),
}

pub type Result<T> = std::result::Result<T, Error>;
