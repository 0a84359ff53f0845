//! Failures of a run and their process exit codes.

use arrival_core::{Error, ErrorClass};

#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error("schema error: {0}")]
    Schema(String),
    #[error("{path}: {source}")]
    Core { path: String, source: Error },
    #[error("precondition violated: {path}: {reason}")]
    Precondition { path: String, reason: String },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl LabError {
    pub fn core(path: &str, source: Error) -> Self {
        LabError::Core { path: path.to_owned(), source }
    }

    pub fn precondition(path: &str, reason: impl Into<String>) -> Self {
        LabError::Precondition { path: path.to_owned(), reason: reason.into() }
    }

    /// 1 = I/O, 2 = schema, 3 = numeric failure, 4 = precondition violation.
    pub fn exit_code(&self) -> u8 {
        match self {
            LabError::Io(_) => 1,
            LabError::Schema(_) => 2,
            LabError::Core { source, .. } => match source.class() {
                ErrorClass::Numeric => 3,
                ErrorClass::Precondition => 4,
            },
            LabError::Precondition { .. } => 4,
        }
    }
}
