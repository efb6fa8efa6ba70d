use thiserror::Error;

/// Errors produced by the core library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("FCIDUMP line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid Hamiltonian: {0}")]
    InvalidHamiltonian(String),

    #[error("invalid active space: {0}")]
    InvalidActiveSpace(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("Davidson did not converge after {iterations} iterations (best residual {best_residual:.3e})")]
    NotConverged { iterations: usize, best_residual: f64 },

    #[error("non-finite cost value at evaluation {evaluation}")]
    NonFiniteCost { evaluation: usize },

    #[error("degenerate Hamiltonian: {0}")]
    Degenerate(String),

    #[error("expectation value has imaginary part {0:.3e}; operator is not Hermitian")]
    NonHermitian(f64),

    #[error("configuration recovery impossible: {0}")]
    Recovery(String),

    #[error("{}: {source}", path.display())]
    File { path: std::path::PathBuf, source: std::io::Error },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
