use std::path::PathBuf;

/// Errors produced anywhere in the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected} coordinates, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("unknown function id {id}; known ids: {known:?}")]
    UnknownFunction { id: u32, known: Vec<u32> },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("missing tournament cell: {0}")]
    MissingCell(String),

    #[error("best-so-far trace has {len} entries, need at least {budget}")]
    TraceTooShort { len: usize, budget: usize },

    #[error("replay exhausted")]
    ReplayExhausted,

    #[error("advisor transport: {0}")]
    AdvisorTransport(String),

    #[error("volatility iteration failed to converge within 100 steps")]
    VolatilityNonConvergence,

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    ParseRecord {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("transcript line {line}: {message}")]
    ParseTranscript { line: usize, message: String },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
