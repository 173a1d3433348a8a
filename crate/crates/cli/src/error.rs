use std::path::PathBuf;

use thiserror::Error;

/// Usage error (bad flags or arguments).
pub const EX_USAGE: i32 = 64;
/// Malformed input data or configuration.
pub const EX_DATAERR: i32 = 65;
/// Input/output failure.
pub const EX_IOERR: i32 = 74;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] homflow_core::Error),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("invalid JSON in {origin}: {source}")]
    Json {
        origin: String,
        #[source]
        source: serde_json::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EX_USAGE,
            CliError::Config(_) | CliError::Core(_) | CliError::Json { .. } => EX_DATAERR,
            CliError::Io { .. } => EX_IOERR,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
