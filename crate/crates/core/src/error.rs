use thiserror::Error;

/// Errors produced by matrix, measure, divergence and solver routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not positive definite (min eigenvalue {min_eigenvalue:e}, max eigenvalue {max_eigenvalue:e})")]
    NotPositiveDefinite {
        min_eigenvalue: f64,
        max_eigenvalue: f64,
    },

    #[error("function is undefined or non-finite at eigenvalue {eigenvalue:e}")]
    SpectralDomain { eigenvalue: f64 },

    #[error("argument outside the domain: {0}")]
    Domain(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("hermitian eigensolver did not converge for matrix {matrix}")]
    Eigensolver { matrix: String },

    #[error("unsupported generator: {0}")]
    UnsupportedGenerator(String),

    #[error("unsupported measure variant: {0}")]
    UnsupportedMeasure(String),

    #[error("generator is not strictly concave near x = {x:e} (second divided difference {value:e})")]
    NotStrictlyConcave { x: f64, value: f64 },

    #[error("inputs do not commute: ||AB - BA||_F = {commutator_norm:e}")]
    NotCommuting { commutator_norm: f64 },

    #[error("{solver} did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence {
        solver: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("channel output is degenerate: regularization shift {shift:e} exceeds 1e-6 of the smallest eigenvalue {min_eigenvalue:e}")]
    Degenerate { shift: f64, min_eigenvalue: f64 },

    #[error("channel is not trace preserving: ||sum K*K - I||_F = {defect:e}")]
    NotTracePreserving { defect: f64 },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
