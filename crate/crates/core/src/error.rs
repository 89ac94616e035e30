use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed audio file {path}: {reason}")]
    Format { path: PathBuf, reason: String },

    #[error("unsupported audio encoding: {0}")]
    Unsupported(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("validation error: {0}")]
    Validation(String),

    #[error("schema error: {0}")]
    Schema(String),

    #[error("configuration error: {0}")]
    Configuration(String),

    /// Silent frame (zero lag-0 autocorrelation); callers pass the frame through.
    #[error("degenerate frame: zero energy")]
    DegenerateFrame,

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("unstable filter: {0}")]
    Stability(String),

    #[error("sampling exhausted after {attempts} attempts (threshold {threshold})")]
    SamplingExhausted { attempts: usize, threshold: f64 },

    #[error("undefined GVD baseline: original similarity matrix has zero diagonal dominance")]
    UndefinedBaseline,

    #[error("undefined correlation: {0}")]
    UndefinedCorrelation(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. } => 4,
            _ => 2,
        }
    }
}
