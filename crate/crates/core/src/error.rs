use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("site {site} out of range for {n} qubits")]
    SiteOutOfRange { site: usize, n: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("density matrix trace {0} deviates from 1")]
    NotNormalized(f64),
    #[error("evolution did not converge: {0}")]
    NonConvergence(String),
    #[error("operator support of {0} sites exceeds the dense limit")]
    SupportOverflow(usize),
    #[error("state leaks out of the code space by {0:e}")]
    OutsideCodespace(f64),
    #[error("operator is not a logical Pauli of the code")]
    NotLogical,
    #[error("ancilla register of {0} qubits exceeds the dense limit")]
    AncillaBudget(usize),
    #[error("internal consistency failure: {0}")]
    Consistency(String),
}

pub type Result<T> = std::result::Result<T, Error>;
