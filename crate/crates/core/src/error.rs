use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),

    #[error("I/O error on {path}: {source}")]
    IoAt { path: PathBuf, source: io::Error },

    #[error("empty vocabulary: no token reaches min_count {min_count}")]
    EmptyVocabulary { min_count: u64 },

    #[error("empty corpus: no document contains an in-vocabulary token")]
    EmptyCorpus,

    #[error("matrix is already TF-IDF weighted")]
    AlreadyWeighted,

    #[error("rank {rank} exceeds min(terms, documents) = {max}")]
    RankTooLarge { rank: usize, max: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("unknown term: {0}")]
    UnknownTerm(String),

    #[error("malformed header: {0}")]
    MalformedHeader(String),

    #[error("truncated entry {index}: expected {expected} entries")]
    TruncatedEntry { index: usize, expected: usize },

    #[error("duplicate token: {0}")]
    DuplicateToken(String),

    #[error("line {line}: expected {expected} values, found {found}")]
    DimensionMismatch {
        line: usize,
        expected: usize,
        found: usize,
    },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("malformed record {record}: {message}")]
    MalformedRecord { record: usize, message: String },

    #[error("{location}: unknown relation label `{label}`")]
    UnknownLabel { location: String, label: String },

    #[error("empty sample: no sampled term is in the vocabulary")]
    EmptySample,

    #[error("k = {k} exceeds the number of candidate neighbors ({max})")]
    KExceedsVocabulary { k: usize, max: usize },

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io_at(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::IoAt {
            path: path.into(),
            source,
        }
    }
}
