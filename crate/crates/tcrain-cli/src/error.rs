use thiserror::Error;

/// Top-level failure classes, mapped onto process exit codes.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad configuration or unreadable input; exit code 2.
    #[error("{0}")]
    Config(String),
    /// A pipeline stage failed on otherwise valid inputs; exit code 3.
    #[error("{0}")]
    Processing(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Processing(_) => 3,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
