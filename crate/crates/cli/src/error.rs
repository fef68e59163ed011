use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{0}")]
    Inadmissible(String),

    #[error("solver failure: {0}")]
    Solver(selfsim_core::Error),

    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },

    #[error("{0}")]
    CountMismatch(selfsim_core::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Inadmissible(_) => 2,
            CliError::Solver(_) => 3,
            CliError::Io { .. } => 4,
            CliError::CountMismatch(_) => 5,
        }
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.display().to_string(), source }
    }
}

impl From<selfsim_core::Error> for CliError {
    fn from(e: selfsim_core::Error) -> Self {
        use selfsim_core::Error as E;
        match e {
            E::CountMismatch { .. } => CliError::CountMismatch(e),
            E::InvalidParams(_) | E::EvenDimension(_) => CliError::Usage(e.to_string()),
            _ => CliError::Solver(e),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
