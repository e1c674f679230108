use serde_json::json;
use thiserror::Error;

use plumbing_core::error::Error as CoreError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },

    #[error("{0}")]
    Validation(String),

    #[error("{0}")]
    Usage(String),

    #[error("{0}")]
    Io(String),

    #[error(transparent)]
    Core(#[from] CoreError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(CoreError::CapExceeded(_)) | CliError::Core(CoreError::NonTermination(_)) => 3,
            _ => 2,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Parse { .. } => "parse",
            CliError::Validation(_) => "validation",
            CliError::Usage(_) => "usage",
            CliError::Io(_) => "io",
            CliError::Core(CoreError::CapExceeded(_)) | CliError::Core(CoreError::NonTermination(_)) => {
                "cap_exceeded"
            }
            CliError::Core(_) => "validation",
        }
    }

    pub fn to_json(&self) -> String {
        let mut err = json!({ "kind": self.kind(), "message": self.to_string() });
        if let CliError::Parse { line, column, .. } = self {
            err["line"] = json!(line);
            err["column"] = json!(column);
        }
        json!({ "error": err }).to_string()
    }
}
