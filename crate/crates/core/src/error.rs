use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the synthesis and analysis pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite values in {tensor}")]
    NonFinite { tensor: String },

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error("loss became NaN at step {step}")]
    NanLoss { step: usize },

    #[error("run {index} ({prompt:?}) failed: {source}")]
    Run {
        index: usize,
        prompt: String,
        #[source]
        source: Box<Error>,
    },

    #[error("group {0:?} has no members")]
    EmptyGroup(String),

    #[error("correlation undefined: {0}")]
    UndefinedCorrelation(String),

    #[error("survey header mismatch: expected `{expected}`, found `{found}`")]
    SurveyHeader { expected: String, found: String },

    #[error("survey row {row}: {message}")]
    SurveyRow { row: usize, message: String },

    #[error("{path}: {message}")]
    File { path: PathBuf, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Image(#[from] image::ImageError),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
