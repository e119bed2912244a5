use std::fmt;
use std::path::PathBuf;

use crate::Var;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// A parse failure in one of the text formats, pinned to a 1-based line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FileFormatError {
    pub path: PathBuf,
    pub line: usize,
    pub message: String,
}

impl FileFormatError {
    pub(crate) fn new(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        FileFormatError {
            path: path.into(),
            line: line.max(1),
            message: message.into(),
        }
    }
}

impl fmt::Display for FileFormatError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.path.display(), self.line, self.message)
    }
}

impl std::error::Error for FileFormatError {}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("no records")]
    NoRecords,

    #[error("no variables")]
    NoVariables,

    #[error("variable mismatch: expected {expected:?}, found {found:?}")]
    VariableMismatch { expected: Vec<Var>, found: Vec<Var> },

    #[error("arity mismatch: expected {expected} values, found {found}")]
    Arity { expected: usize, found: usize },

    #[error("scope mismatch: {0}")]
    ScopeMismatch(String),

    #[error("enumeration limit: scope has {scope} variables, limit is {limit}")]
    EnumerationLimit { scope: usize, limit: usize },

    #[error("structural error: {0}")]
    Structural(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Format(#[from] FileFormatError),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}
