use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid spectrum: {0}")]
    InvalidSpectrum(String),

    #[error("invalid couplings: {0}")]
    InvalidCouplings(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Weights or polynomial values left the representable range.
    #[error("solver overflow at index {index}: {detail}")]
    SolverOverflow { index: usize, detail: String },

    #[error("eigensolver did not converge for eigenvalue {index} after {sweeps} sweeps")]
    NoConvergence { index: usize, sweeps: usize },

    #[error("sample {index}: {source}")]
    Sample {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("beta fit failed: {0}")]
    Fit(String),

    #[error("run cancelled after {completed} samples")]
    Cancelled { completed: usize },

    #[error("export failed: {0}")]
    Export(String),
}

/// Coarse classification used by front ends to pick exit codes and API error codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Validation,
    Numerical,
    Cancelled,
    Io,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::InvalidSpectrum(_)
            | Error::InvalidCouplings(_)
            | Error::InvalidArgument(_)
            | Error::Fit(_) => ErrorKind::Validation,
            Error::SolverOverflow { .. } | Error::NoConvergence { .. } => ErrorKind::Numerical,
            Error::Sample { source, .. } => source.kind(),
            Error::Cancelled { .. } => ErrorKind::Cancelled,
            Error::Export(_) => ErrorKind::Io,
        }
    }

    /// Innermost error, looking through per-sample wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Sample { source, .. } => source.root(),
            other => other,
        }
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Export(e.to_string())
    }
}
