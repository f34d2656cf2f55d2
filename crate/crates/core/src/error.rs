use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("matrix is not symmetric (relative residual {residual:.3e})")]
    NotSymmetric { residual: f64 },

    #[error("tensor is not traceless (|trace| = {trace:.3e}, norm = {norm:.3e})")]
    NotTraceless { trace: f64, norm: f64 },

    #[error("operator is not on the cone boundary (margin {margin:.3e}, tolerance {tol:.3e})")]
    NotOnBoundary { margin: f64, tol: f64 },

    #[error("not a valid curvature cone: {0}")]
    InvalidCone(String),

    #[error("unknown name in registry: {0}")]
    UnknownName(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
