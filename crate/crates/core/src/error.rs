use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the localization core.
#[derive(Debug, Error)]
pub enum Error {
    #[error("no candidates to vote over")]
    NoCandidates,

    #[error("token span {first}..={last} out of range for {len} soft-token positions")]
    SpanOutOfRange {
        first: usize,
        last: usize,
        len: usize,
    },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("ungroundable query {word:?} in sentence {sentence}: no model produced a candidate")]
    Ungroundable { word: String, sentence: String },

    #[error("format error at {path}: {message}")]
    Format { path: String, message: String },

    #[error("consistency error: {0}")]
    Consistency(String),

    #[error("i/o error on {path:?}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("json error in {path:?}: {source}")]
    Json {
        path: PathBuf,
        source: serde_json::Error,
    },
}

impl Error {
    pub fn format(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
