use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: invalid UTF-8 at byte offset {offset}")]
    Decode { path: PathBuf, offset: usize },

    #[error("parallel corpus is not aligned: source has {source_lines} lines, target has {target_lines}")]
    Alignment {
        source_lines: usize,
        target_lines: usize,
    },

    #[error("cannot sample {requested} items from a collection of {available}")]
    SampleSize { requested: usize, available: usize },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("malformed escape sequence at character {position}: {reason}")]
    Escape { position: usize, reason: String },

    #[error("vocabulary size {achieved} is outside the tolerance band [{low}, {high}]")]
    Tolerance {
        achieved: usize,
        low: usize,
        high: usize,
    },

    #[error("invalid vocabulary: {0}")]
    Vocabulary(String),

    #[error("unknown language `{0}`")]
    UnknownLanguage(String),

    #[error("parse error at line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("reserved marker character in `{0}`")]
    ReservedMarker(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
