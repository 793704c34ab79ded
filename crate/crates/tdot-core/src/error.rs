use thiserror::Error;

/// Failures raised by the numerical engines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParam { field: &'static str, reason: String },

    #[error("momentum {k} lies on a band edge (sin k = {sin_k:e})")]
    BandEdge { k: f64, sin_k: f64 },

    #[error("expected 2 bound states at g = {g}, found {found}")]
    BoundStateCount { g: f64, found: usize },

    #[error("singular matrix at pivot {pivot}")]
    Singular { pivot: usize },

    #[error("truncation not converged: boundary amplitude {amplitude:e} exceeds {limit:e}")]
    NotConverged { amplitude: f64, limit: f64 },

    #[error("degenerate energies for distinct states ({gap:e})")]
    DegenerateEnergies { gap: f64 },

    #[error("flip phase is not periodic (mismatch {mismatch:e})")]
    NotPeriodic { mismatch: f64 },

    #[error("quadrature failed: {0}")]
    Quadrature(String),

    #[error("wavepacket reached the chain boundary (weight {weight:e})")]
    BoundaryReflection { weight: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
