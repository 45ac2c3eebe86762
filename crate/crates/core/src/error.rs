use thiserror::Error;

/// Errors raised by evaluation, fitting and search routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not positive definite (pivot {pivot} at row {row})")]
    NotPositiveDefinite { row: usize, pivot: f64 },

    #[error("degenerate linear system: {0}")]
    DegenerateSystem(String),

    #[error("Newton iteration did not converge after {iterations} steps (|f| = {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("derivative vanished: {0}")]
    DerivativeVanished(String),

    #[error("lattice radius {required:.3} exceeds cap {cap:.3}; tolerance {tol:e} unreachable")]
    RadiusOverflow { required: f64, cap: f64, tol: f64 },

    #[error("point is (numerically) singular on the theta divisor: |grad| = {grad_norm:e}")]
    SingularPoint { grad_norm: f64 },

    #[error("pole at argument: {0}")]
    PoleAtArgument(String),

    #[error("indecomposability check failed: |B_12| = {offdiag:e}")]
    IndecomposabilityCheckFailed { offdiag: f64 },

    #[error("value not representable in double precision: {0}")]
    NonFinite(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    /// Stable name used in reports and diagnostics.
    pub fn name(&self) -> &'static str {
        match self {
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::NotPositiveDefinite { .. } => "NotPositiveDefinite",
            Error::DegenerateSystem(_) => "DegenerateSystem",
            Error::NoConvergence { .. } => "NoConvergence",
            Error::DerivativeVanished(_) => "DerivativeVanished",
            Error::RadiusOverflow { .. } => "RadiusOverflow",
            Error::SingularPoint { .. } => "SingularPoint",
            Error::PoleAtArgument(_) => "PoleAtArgument",
            Error::IndecomposabilityCheckFailed { .. } => "IndecomposabilityCheckFailed",
            Error::NonFinite(_) => "NonFinite",
            Error::InvalidInput(_) => "InvalidInput",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
