use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("duplicate record {plate}-{mjd}-{fiberid} at line {line}")]
    DuplicateRecord {
        line: usize,
        plate: u32,
        mjd: u32,
        fiberid: u32,
    },

    #[error("unknown ZWARNING bits in mask {0:#x}")]
    UnknownFlagBits(u32),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("impaired spectrum: {0}")]
    ImpairedSpectrum(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("backward pass requires a forward trace: {0}")]
    MissingForwardState(String),

    #[error("config: {0}")]
    Config(String),

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error("image format: {0}")]
    Image(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}
