use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },
    #[error("missing asset: {0}")]
    MissingAsset(PathBuf),
    #[error("source `{source_id}` appears in both train and test splits")]
    SplitViolation { source_id: String },
    #[error("no visible eye")]
    NoVisibleEye,
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),
    #[error("correlation undefined for a zero vector")]
    UndefinedCorrelation,
    #[error("track lost: {0}")]
    TrackLost(String),
    #[error("numeric error: {0}")]
    Numeric(String),
    #[error("invalid dataset: {0}")]
    InvalidDataset(String),
    #[error("invalid model file: {0}")]
    InvalidModel(String),
    #[error("io error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("json error at {path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
