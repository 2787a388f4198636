use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error in {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("{path}: row {row}: {message}")]
    Row {
        path: PathBuf,
        row: usize,
        message: String,
    },

    #[error("{path}: column {column} not found")]
    MissingColumn { path: PathBuf, column: String },

    #[error("{path}: zero parseable rows")]
    NoRows { path: PathBuf },

    #[error("cannot interpolate index {index}: no valid neighbor within distance {neighbors} on the {side} side")]
    BoundaryGap {
        index: usize,
        neighbors: usize,
        side: &'static str,
    },

    #[error("degenerate range: all values equal {0}")]
    DegenerateRange(f64),

    #[error("series too short: {len} points, need more than {required}")]
    TooShort { len: usize, required: usize },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("empty input")]
    Empty,

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("undefined {0}")]
    Undefined(&'static str),

    #[error("rule base is empty")]
    EmptyRuleBase,

    #[error("model schema mismatch: expected {expected}, found {found}")]
    Schema { expected: String, found: String },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// True for failures caused by the input data rather than by arguments or
    /// internal state.
    pub fn is_data_error(&self) -> bool {
        matches!(
            self,
            Error::Io { .. }
                | Error::Csv { .. }
                | Error::Row { .. }
                | Error::MissingColumn { .. }
                | Error::NoRows { .. }
                | Error::BoundaryGap { .. }
                | Error::DegenerateRange(_)
                | Error::TooShort { .. }
                | Error::LengthMismatch { .. }
                | Error::Empty
                | Error::Undefined(_)
                | Error::Schema { .. }
                | Error::Json(_)
        )
    }

    pub fn is_usage_error(&self) -> bool {
        matches!(self, Error::InvalidArgument(_))
    }
}
