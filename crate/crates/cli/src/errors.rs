//! Error-to-exit-code mapping. The contract is stable:
//! 0 success, 2 config parse error, 3 domain/precondition error,
//! 4 validation-assertion failure.

use std::fmt;

#[derive(Debug)]
pub enum CliError {
    /// Unreadable files, malformed JSON/CSV, bad flag syntax.
    Config(String),
    /// Well-formed input with out-of-domain values.
    Domain(String),
    /// A validation run whose assertion failed beyond slack.
    Validation(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Domain(_) => 3,
            CliError::Validation(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "config error: {msg}"),
            CliError::Domain(msg) => write!(f, "domain error: {msg}"),
            CliError::Validation(msg) => write!(f, "validation failed: {msg}"),
        }
    }
}

impl From<pacbayes::Error> for CliError {
    fn from(e: pacbayes::Error) -> Self {
        CliError::Domain(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// JSON syntax and shape problems carry serde's line/column.
pub fn json_config_error(path: &std::path::Path, e: &serde_json::Error) -> CliError {
    CliError::Config(format!(
        "{}: line {}, column {}: {e}",
        path.display(),
        e.line(),
        e.column()
    ))
}
