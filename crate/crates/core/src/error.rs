use thiserror::Error;

/// Errors produced by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("qubit count {0} outside supported range 1..={max}", max = crate::MAX_QUBITS)]
    QubitCount(usize),

    #[error("matrix is {rows}x{cols}, expected {expected}x{expected}")]
    Dimension {
        rows: usize,
        cols: usize,
        expected: usize,
    },

    #[error("operands act on {left} and {right} qubits")]
    QubitMismatch { left: usize, right: usize },

    #[error("qubit index {index} out of range for {n} qubits")]
    QubitIndex { index: usize, n: usize },

    #[error("invalid multi-index: {0}")]
    MultiIndex(String),

    #[error("operator is not Hermitian (max |X - X^dagger| = {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("operator is not positive semidefinite (smallest eigenvalue {min_eigenvalue:.3e})")]
    NotPositive { min_eigenvalue: f64 },

    #[error("operator is singular (smallest eigenvalue {min_eigenvalue:.3e})")]
    Singular { min_eigenvalue: f64 },

    #[error("zero operator is not allowed here")]
    ZeroOperator,

    #[error("eigendecomposition did not converge")]
    NoConvergence,

    #[error("{name} = {value} outside domain {domain}")]
    Domain {
        name: &'static str,
        value: f64,
        domain: String,
    },

    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),

    #[error("invalid time grid: {0}")]
    Grid(String),

    #[error("invalid operator file: {0}")]
    Format(String),

    #[error("invalid replay descriptor: {0}")]
    Descriptor(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain_error(name: &'static str, value: f64, domain: impl Into<String>) -> Error {
    Error::Domain {
        name,
        value,
        domain: domain.into(),
    }
}
