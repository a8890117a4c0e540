use std::path::Path;

use serde_json::json;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("no usable rows left after parsing and filtering")]
    EmptyAfterFilter,
    #[error(transparent)]
    Core(#[from] rhull::Error),
}

impl CliError {
    pub fn io(path: &Path, err: impl std::fmt::Display) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            message: err.to_string(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Io { .. } => "io",
            CliError::Parse { .. } => "parse",
            CliError::EmptyAfterFilter => "empty_after_filter",
            CliError::Core(_) => "computation",
        }
    }

    /// Machine-readable error report written to stderr.
    pub fn to_json(&self) -> String {
        let mut v = json!({ "error": self.kind(), "message": self.to_string() });
        if let CliError::Parse { line, .. } = self {
            v["line"] = json!(line);
        }
        v.to_string()
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
