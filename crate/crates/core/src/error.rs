use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {op}: {left:?} vs {right:?}")]
    Shape {
        op: &'static str,
        left: Vec<usize>,
        right: Vec<usize>,
    },

    #[error("data length {len} does not match shape {shape:?}")]
    DataLength { shape: Vec<usize>, len: usize },

    #[error("invalid label {0}: expected 0 or 1")]
    InvalidLabel(i64),

    #[error("token id {id} out of range for vocabulary of size {size}")]
    TokenOutOfRange { id: usize, size: usize },

    #[error("token {0:?} is not in the vocabulary")]
    UnknownToken(String),

    #[error("vocabulary is missing special token {0}")]
    MissingSpecialToken(&'static str),

    #[error("sequence of length {len} is shorter than the required {required}")]
    SequenceTooShort { len: usize, required: usize },

    #[error("empty input to {0}")]
    EmptyInput(&'static str),

    #[error("dataset of {len} examples is too small; at least {min} required")]
    DatasetTooSmall { len: usize, min: usize },

    #[error("every time step is masked")]
    AllMasked,

    #[error("weight file is missing tensor {0:?}")]
    MissingWeight(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("malformed {format} data: {message}")]
    Format {
        format: &'static str,
        message: String,
    },

    #[error("training diverged at epoch {epoch}: loss is {loss}")]
    Divergence { epoch: usize, loss: f64 },

    #[error("numerical failure: {0}")]
    Numeric(String),

    #[error("search space exhausted")]
    SpaceExhausted,

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn shape(op: &'static str, left: &[usize], right: &[usize]) -> Self {
        Error::Shape {
            op,
            left: left.to_vec(),
            right: right.to_vec(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(format: &'static str, message: impl Into<String>) -> Self {
        Error::Format {
            format,
            message: message.into(),
        }
    }

    /// True for failures caused by bad input data or files rather than numerics.
    pub fn is_data_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidLabel(_)
                | Error::TokenOutOfRange { .. }
                | Error::UnknownToken(_)
                | Error::MissingSpecialToken(_)
                | Error::MissingWeight(_)
                | Error::DatasetTooSmall { .. }
                | Error::Parse { .. }
                | Error::Format { .. }
                | Error::Io { .. }
                | Error::Json(_)
                | Error::Csv(_)
        )
    }

    pub fn is_numeric_error(&self) -> bool {
        matches!(self, Error::Divergence { .. } | Error::Numeric(_))
    }
}
