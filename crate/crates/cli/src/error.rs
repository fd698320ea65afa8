use std::fmt;

use acnum_core::Error as CoreError;

/// Failure of a harness command, split by exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags, parameters, files or tolerances (exit 2).
    Usage(String),
    /// A numerical routine failed (exit 1).
    Failed(String),
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Failed(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Failed(m) => write!(f, "error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::DimensionMismatch { .. }
            | CoreError::NotSquare { .. }
            | CoreError::NonFinite
            | CoreError::NotUnitary { .. }
            | CoreError::InvalidArgument(_)
            | CoreError::TooLarge { .. }
            | CoreError::NotAGroup(_)
            | CoreError::Parse { .. }
            | CoreError::Io(_) => CliError::Usage(e.to_string()),
            _ => CliError::Failed(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Usage(format!("json: {e}"))
    }
}
