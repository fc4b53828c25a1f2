use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported mesh configuration: {0}")]
    Unsupported(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("degenerate cell {cell}: {reason}")]
    DegenerateCell { cell: usize, reason: String },
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),
    #[error("mesh file line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid material: {0}")]
    InvalidMaterial(String),
    #[error("inconsistent orientation on edge {edge}")]
    Orientation { edge: usize },
    #[error("factorization failed: {0}")]
    Factorization(String),
    #[error("eigensolver did not converge after {restarts} restarts; Ritz residuals {residuals:?}")]
    NotConverged { restarts: usize, residuals: Vec<f64> },
    #[error("fit failed: {0}")]
    Fit(String),
    #[error("reference data: {0}")]
    Reference(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
