use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid Hermite parameters: alpha={alpha}, u={u}")]
    InvalidBasis { alpha: f64, u: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("quadrature order {0} outside supported range 1..=200")]
    QuadratureOrder(usize),

    #[error("basis change ratio a={0} outside [1e-6, 1e6]")]
    DegenerateTransform(f64),

    #[error("charge neutrality violated: sum q*alpha*C00 = {0:e}")]
    Neutrality(f64),

    #[error("species {0} has zero total density")]
    ZeroDensity(usize),

    #[error("species index {0} out of range")]
    NoSuchSpecies(usize),

    #[error("reconstruction has imaginary residue {0:e} (relative)")]
    ImaginaryResidue(f64),

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("Newton solver did not converge after {iterations} iterations (|F| = {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
