use std::path::PathBuf;

use crate::attrs::MAX_ATTRS;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error at line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("input is empty")]
    EmptyInput,

    #[error("unknown attribute `{0}`")]
    UnknownAttribute(String),

    #[error("ambiguous attribute `{0}`; qualify it with its table name")]
    AmbiguousAttribute(String),

    #[error("duplicate attribute `{0}`")]
    DuplicateAttribute(String),

    #[error("schema has {0} attributes; at most {MAX_ATTRS} are supported")]
    SchemaTooWide(usize),

    #[error("invalid join specification: {0}")]
    InvalidSpec(String),

    #[error("partitions come from instances of different sizes ({left} vs {right} rows)")]
    PartitionMismatch { left: usize, right: usize },

    #[error("input contract violated: {0}")]
    Contract(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("join would produce {rows} rows, above the limit of {limit}")]
    RowLimit { rows: u64, limit: u64 },

    #[error("internal invariant violated: {0}")]
    Invariant(String),

    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
