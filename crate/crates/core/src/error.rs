use std::io;
use std::path::PathBuf;

use thiserror::Error;

/// Coarse classification of fatal conditions, used for process exit codes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorClass {
    Config,
    Data,
    Numeric,
}

impl ErrorClass {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorClass::Config => 2,
            ErrorClass::Data => 3,
            ErrorClass::Numeric => 4,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ErrorClass::Config => "config",
            ErrorClass::Data => "data",
            ErrorClass::Numeric => "numeric",
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: io::Error },

    #[error("i/o error: {0}")]
    Io(#[from] io::Error),

    #[error("bot list not found: {0}")]
    MissingBotList(PathBuf),

    #[error("requested split sizes ({requested}) exceed corpus size ({available})")]
    SplitTooLarge { requested: usize, available: usize },

    #[error("vocabulary is empty after applying min_count={min_count}")]
    EmptyVocabulary { min_count: u64 },

    #[error("hierarchical softmax needs at least 2 words, vocabulary has {0}")]
    VocabularyTooSmall(usize),

    #[error("corpus contains no trainable tokens")]
    EmptyCorpus,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("word not in vocabulary: {0}")]
    UnknownWord(String),

    #[error("zero-norm vector for word: {0}")]
    ZeroNorm(String),

    #[error("vocabulary mismatch: {0}")]
    VocabularyMismatch(String),

    #[error("value {value} does not belong to attribute {attribute}")]
    ValueAttributeMismatch { value: String, attribute: String },

    #[error("format error: expected {expected}, found {found}")]
    Format { expected: String, found: String },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("missing groups: {0:?}")]
    MissingGroups(Vec<String>),

    #[error("non-finite value in {context}: {detail}")]
    NonFinite { context: String, detail: String },
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::InvalidArgument(_) | Error::MissingBotList(_) => ErrorClass::Config,
            Error::NonFinite { .. } => ErrorClass::Numeric,
            _ => ErrorClass::Data,
        }
    }

    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }

    pub(crate) fn format(expected: impl Into<String>, found: impl Into<String>) -> Self {
        Error::Format {
            expected: expected.into(),
            found: found.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
