use thiserror::Error;

/// Errors raised by validation, domain checks and resource limits.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix has non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("empty matrix")]
    Empty,

    #[error("not Hermitian (max asymmetry {max_asymmetry:.3e} > {tolerance:.1e})")]
    NotHermitian { max_asymmetry: f64, tolerance: f64 },

    #[error("not positive semi-definite (min eigenvalue {min_eigenvalue:.3e})")]
    NotPositive { min_eigenvalue: f64 },

    #[error("trace is not 1 (got {trace})")]
    InvalidTrace { trace: f64 },

    #[error("test operator spectrum outside [0, 1] (eigenvalue {eigenvalue:.3e})")]
    NotATest { eigenvalue: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("{name} = {value} outside domain: {reason}")]
    Domain {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("required dimension {required} exceeds cap {cap}")]
    Resource { required: usize, cap: usize },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("Kraus family is not trace preserving (residual {residual:.3e})")]
    NotTracePreserving { residual: f64 },

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("eigendecomposition did not converge")]
    NoConvergence,

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Stable snake-case tag for machine-readable reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NotSquare { .. } => "not_square",
            Error::NonFinite { .. } => "non_finite",
            Error::Empty => "empty",
            Error::NotHermitian { .. } => "not_hermitian",
            Error::NotPositive { .. } => "not_positive",
            Error::InvalidTrace { .. } => "invalid_trace",
            Error::NotATest { .. } => "not_a_test",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::Domain { .. } => "domain",
            Error::Resource { .. } => "resource",
            Error::Degenerate(_) => "degenerate",
            Error::NotTracePreserving { .. } => "not_trace_preserving",
            Error::Infeasible(_) => "infeasible",
            Error::NoConvergence => "no_convergence",
            Error::Parse(_) => "parse",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(name: &'static str, value: f64, reason: &'static str) -> Result<T> {
    Err(Error::Domain {
        name,
        value,
        reason,
    })
}
