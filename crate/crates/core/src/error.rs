use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("record {record} (line {line}): {message}")]
    Record {
        record: usize,
        line: usize,
        message: String,
    },

    #[error("empty input: {0}")]
    Empty(String),

    #[error("unknown label `{label}` at line {line}; not present in the training inventory")]
    UnknownLabel { label: String, line: usize },

    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("backward called without a recorded forward pass")]
    MissingForwardPass,

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid probability distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid experience: {0}")]
    InvalidExperience(String),

    #[error("tagger has not been trained")]
    Untrained,

    #[error("no base prediction for sentence {sentence}, token {token}")]
    MissingPrediction { sentence: usize, token: usize },

    #[error("invalid BIO2 label `{0}`")]
    InvalidBioLabel(String),

    #[error("sequence length mismatch: {0}")]
    LengthMismatch(String),

    #[error("token partition is not exact: {0}")]
    Partition(String),

    #[error("model archive error: {0}")]
    Archive(String),
}

impl Error {
    pub fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }

    /// Process exit code for the command line: 2 for I/O failures, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io(_) => 2,
            _ => 1,
        }
    }
}
