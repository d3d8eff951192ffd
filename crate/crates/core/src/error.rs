use thiserror::Error;

use crate::stabilizer::ValidationReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parse error at position {position}: {message}")]
    Parse { position: usize, message: String },

    #[error("dimension mismatch: expected {expected} qubits, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("operator {0} is not Hermitian (sign must be + or -)")]
    NonHermitian(String),

    #[error("capacity exceeded: {what} requires n <= {limit}, got n = {n}")]
    Capacity {
        what: &'static str,
        limit: usize,
        n: usize,
    },

    #[error("invalid code:\n{0}")]
    InvalidCode(ValidationReport),

    #[error("codespace construction failed: {0}")]
    Construction(String),

    #[error("invalid Hamiltonian: {0}")]
    Hamiltonian(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("uninformative operating point: {0}")]
    Uninformative(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}
