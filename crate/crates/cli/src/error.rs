use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("{}: line {line}: {reason}", path.display())]
    Format {
        path: PathBuf,
        line: usize,
        reason: String,
    },

    #[error(transparent)]
    Model(#[from] g2beam::Error),
}

impl CliError {
    /// Process exit status: 2 for configuration or usage, 3 for I/O and
    /// unreadable input files, 4 for numeric failures.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io { .. } | CliError::Format { .. } => 3,
            CliError::Model(e) if e.is_numeric() => 4,
            CliError::Model(_) => 2,
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
