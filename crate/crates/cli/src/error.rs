use std::io;
use std::path::{Path, PathBuf};

use glyphpress_core::ValidationReport;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("invalid render config:\n{0}")]
    InvalidConfig(ValidationReport),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::InvalidConfig(_) => 2,
            CliError::Io { .. } | CliError::Failed(_) => 1,
        }
    }

    pub fn io(path: &Path) -> impl FnOnce(io::Error) -> CliError + '_ {
        move |source| CliError::Io { path: path.to_path_buf(), source }
    }

    pub fn failed(e: impl ToString) -> CliError {
        CliError::Failed(e.to_string())
    }
}
