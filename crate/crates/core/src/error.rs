use std::fmt;

use thiserror::Error;

use crate::analytics::AnalyticsError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Syntax error from the query parser.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    /// Byte offset into the query text.
    pub offset: usize,
    pub expected: Vec<String>,
    pub found: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "syntax error at byte {}: expected ", self.offset)?;
        match self.expected.as_slice() {
            [] => f.write_str("nothing")?,
            [one] => f.write_str(one)?,
            many => write!(f, "one of {}", many.join(", "))?,
        }
        write!(f, ", found {}", self.found)
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("unknown table `{0}`")]
    UnknownTable(String),
    #[error("unknown column `{column}` in `{table}`")]
    UnknownColumn { table: String, column: String },
    #[error("unknown module `{0}`")]
    UnknownModule(String),
    #[error("type mismatch: {0}")]
    TypeMismatch(String),
    #[error("table `{0}` already exists")]
    DuplicateTable(String),
    #[error("module `{0}` is already registered")]
    DuplicateModule(String),
    #[error("table `{0}` is in use by a running query")]
    TableInUse(String),
    #[error("line {line}: {message}")]
    Csv { line: u64, message: String },
    #[error("row {row}, column `{column}`: {message}")]
    CellParse { row: u64, column: String, message: String },
    #[error("stale or foreign cursor")]
    StaleCursor,
    #[error("module `{module}` failed at input row {row}: {message}")]
    ModuleFailed { module: String, row: usize, message: String },
    #[error("module `{module}`: {message}")]
    ModuleRejected { module: String, message: String },
    #[error("job `{0}` not found")]
    JobNotFound(String),
    #[error("job `{id}` is {status}{}", .message.as_deref().map(|m| format!(": {m}")).unwrap_or_default())]
    JobNotReady { id: String, status: String, message: Option<String> },
    #[error("job queue is full")]
    QueueFull,
    #[error(transparent)]
    Analytics(#[from] AnalyticsError),
    #[error("{0}")]
    InvalidRequest(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        let line = e.position().map_or(0, |p| p.line());
        match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::Io(io),
            other => Error::Csv { line, message: format!("{other:?}") },
        }
    }
}

impl Error {
    /// Stable machine-readable code, used on the wire.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Parse(_) => "parse_error",
            Error::UnknownTable(_) => "unknown_table",
            Error::UnknownColumn { .. } => "unknown_column",
            Error::UnknownModule(_) => "unknown_module",
            Error::TypeMismatch(_) | Error::CellParse { .. } => "type_mismatch",
            Error::DuplicateTable(_) => "duplicate_table",
            Error::DuplicateModule(_) => "duplicate_module",
            Error::TableInUse(_) => "table_in_use",
            Error::StaleCursor => "stale_cursor",
            Error::JobNotFound(_) => "job_not_found",
            Error::JobNotReady { .. } => "job_not_ready",
            Error::QueueFull => "queue_full",
            Error::ModuleFailed { .. } => "module_failed",
            Error::ModuleRejected { .. } | Error::Analytics(_) => "invalid_request",
            Error::Csv { .. } | Error::InvalidRequest(_) => "invalid_request",
            Error::Io(_) => "io_error",
        }
    }
}
