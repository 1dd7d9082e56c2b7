//! CLI error type mapped onto process exit codes.

use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    /// Config parse/validation failure (exit code 1). Messages carry the
    /// offending `section.key` path.
    Config(String),
    /// Whole-run evaluation failure (exit code 2). Per-point sweep errors
    /// are recorded in-row instead and do not raise this.
    Eval(String),
    /// Filesystem failure (exit code 3).
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Eval(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Eval(m) => write!(f, "evaluation error: {m}"),
            CliError::Io(m) => write!(f, "io error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}
