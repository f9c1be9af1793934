use std::path::PathBuf;
use std::process::ExitCode;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {reason}")]
    Input { path: PathBuf, reason: String },
    #[error("no counterpart for {0}")]
    UnpairedFile(PathBuf),
    #[error(transparent)]
    Engine(#[from] morp::error::EngineError),
    #[error(transparent)]
    Patch(#[from] morp::error::PatchError),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn input(path: impl Into<PathBuf>, reason: impl ToString) -> Self {
        CliError::Input {
            path: path.into(),
            reason: reason.to_string(),
        }
    }

    pub fn exit_code(&self) -> ExitCode {
        use morp::error::{EngineError, PatchError};
        let code = match self {
            CliError::Config(_) => 1,
            CliError::Engine(EngineError::Config(_) | EngineError::DuplicateOutput { .. }) => 1,
            CliError::Patch(PatchError::ManifestParse { .. } | PatchError::SplitLeakage(_)) => 1,
            CliError::Io { .. } | CliError::Input { .. } | CliError::UnpairedFile(_) => 3,
            CliError::Engine(_) | CliError::Patch(_) => 3,
        };
        ExitCode::from(code)
    }
}

impl From<morp::error::ConfigError> for CliError {
    fn from(e: morp::error::ConfigError) -> Self {
        CliError::Config(e.to_string())
    }
}

/// Outcome of a command that ran to completion.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Completion {
    Full,
    /// Some inputs or regions were skipped.
    Partial,
}
