use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("qubit index {index} out of range for {n} qubits")]
    QubitOutOfRange { index: usize, n: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("environment is not hermitian (max asymmetry {0:.3e})")]
    NonHermitian(f64),

    #[error("cover is incomplete: {} measurable pairs missing, first {:?}", .missing.len(), .missing.first())]
    IncompleteCover { missing: Vec<(usize, usize)> },

    #[error("verification failed: {0}")]
    Verification(String),

    #[error("phase chain broken: {0}")]
    PhaseChain(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
