use std::path::PathBuf;

use datagraph_core::{BackendError, GraphError, TraversalError, WorldError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    /// Malformed document. `line`/`column` are 1-based.
    #[error("{origin}: parse error at line {line}, column {column}: {message}")]
    Parse {
        origin: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{origin}: unsupported format_version {found} (expected {expected})")]
    FormatVersion {
        origin: String,
        found: u32,
        expected: u32,
    },
    #[error("{0}")]
    Graph(#[from] GraphError),
    #[error("{0}")]
    World(#[from] WorldError),
    #[error("{0}")]
    Traversal(#[from] TraversalError),
    #[error("{0}")]
    Backend(#[from] BackendError),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("route error: {0}")]
    Route(String),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(origin: impl Into<String>, err: &serde_json::Error) -> Self {
        Error::Parse {
            origin: origin.into(),
            line: err.line(),
            column: err.column(),
            message: err.to_string(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
