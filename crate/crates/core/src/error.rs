use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(&'static str),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("singular covariance matrix")]
    SingularCovariance,

    #[error("joint control space has {size} elements, exceeding the cap of {cap}")]
    SpaceTooLarge { size: u128, cap: u128 },

    #[error("no target estimate available for planning")]
    MissingEstimate,

    #[error("missing bus payload from agent {0}")]
    MissingPayload(usize),

    #[error("failed to parse {path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("invalid configuration:\n  - {}", .0.join("\n  - "))]
    Validation(Vec<String>),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("malformed trace file {path}: {message}")]
    TraceFormat { path: PathBuf, message: String },
}

impl Error {
    /// Process exit code for the command-line tool: 1 for bad input, 2 for
    /// anything that failed while running.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse { .. } | Error::Validation(_) => 1,
            _ => 2,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
