use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, HarnessError>;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] treelimit::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl HarnessError {
    /// Process exit code: 2 for bad input, 1 otherwise.
    pub fn exit_code(&self) -> u8 {
        match self {
            HarnessError::Config(_) | HarnessError::Json(_) => 2,
            HarnessError::Core(e) if is_input_error(e) => 2,
            _ => 1,
        }
    }
}

fn is_input_error(e: &treelimit::Error) -> bool {
    use treelimit::Error::*;
    matches!(
        e,
        TooFewNodes(_)
            | EntryBelowOne { .. }
            | SumMismatch { .. }
            | NTooLarge { .. }
            | InvalidDistribution(_)
            | ModelSizeMismatch { .. }
            | InfeasibleModel { .. }
            | InvalidTree(_)
            | InvalidGraph(_)
            | Parse(_)
    )
}
