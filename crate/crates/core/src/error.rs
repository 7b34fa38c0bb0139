use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid Pauli text at position {position}: {message}")]
    PauliParse { position: usize, message: String },

    #[error("length mismatch: {left} vs {right} qubits")]
    LengthMismatch { left: usize, right: usize },

    #[error("{n} qubits exceeds the dense limit of {limit}")]
    DenseLimit { n: usize, limit: usize },

    #[error("FCIDUMP line {line}: {message}")]
    Fcidump { line: usize, message: String },

    #[error("symmetry violation: {0}")]
    Symmetry(String),

    #[error("imaginary residue {residue:e} on {what}")]
    ImaginaryResidue { what: String, residue: f64 },

    #[error("Hamiltonian has no terms")]
    EmptyHamiltonian,

    #[error("sequence has no `{0}` markers")]
    MissingMarkers(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.into())
    }
}
