use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("model infeasible by construction: {0}")]
    InfeasibleByConstruction(String),

    #[error("invalid fixing layer: {0}")]
    InvalidLayer(String),

    #[error("malformed solution: {0}")]
    MalformedSolution(String),

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("invalid class spec `{spec}`: {reason}")]
    InvalidClassSpec { spec: String, reason: String },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("backend: {0}")]
    Backend(String),

    #[error("oracle guard: {0}")]
    OracleGuard(String),

    #[error("kernel search configuration: {0}")]
    EmptyKernel(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("config: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
