use thiserror::Error;

/// Errors surfaced by grid construction, field operations and the integrators.
#[derive(Debug, Error)]
pub enum SpectralError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("operands live on different grids")]
    GridMismatch,

    #[error("non-finite value at xi = {xi}")]
    NonFinite { xi: f64 },

    #[error("spectral support reaches |xi| = {support} but the guard allows {limit} (half the grid radius)")]
    SupportOverflow { support: f64, limit: f64 },

    #[error("hermitian symmetry violated at t = {t}: relative deviation {deviation:.3e}")]
    SymmetryViolation { deviation: f64, t: f64 },

    #[error("data family does not fit the grid: {0}")]
    DataLayout(String),

    #[error("time lattice mismatch: {0}")]
    LatticeMismatch(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("resource budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("numerical blowup at t = {t}: {what}")]
    Blowup { t: f64, what: String },

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, SpectralError>;
