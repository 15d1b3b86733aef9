use std::path::Path;

use chrono::NaiveDate;

pub type Result<T, E = IoError> = std::result::Result<T, E>;

/// Failures of the file, configuration and command layer. Every variant
/// names the input it refers to.
#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("{path}: row {row}, column {column}: {message}")]
    Parse {
        path: String,
        row: u64,
        column: String,
        message: String,
    },

    #[error("{path}: row {row}, column {column}: value {value} is outside {range}")]
    RangeViolation {
        path: String,
        row: u64,
        column: String,
        value: f64,
        range: &'static str,
    },

    #[error("{path}: row {row}: expected date {expected}, found {found}")]
    GapDetected {
        path: String,
        row: u64,
        expected: NaiveDate,
        found: NaiveDate,
    },

    #[error("{path}: {message}")]
    Invalid { path: String, message: String },

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{context}: {source}")]
    Model {
        context: String,
        #[source]
        source: windflex_core::Error,
    },
}

impl IoError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        IoError::Io {
            path: path.display().to_string(),
            source,
        }
    }

    pub fn invalid(path: impl Into<String>, message: impl Into<String>) -> Self {
        IoError::Invalid {
            path: path.into(),
            message: message.into(),
        }
    }

    pub fn model(context: impl Into<String>, source: windflex_core::Error) -> Self {
        IoError::Model {
            context: context.into(),
            source,
        }
    }

    /// True when the input itself is at fault rather than the computation.
    pub fn is_validation(&self) -> bool {
        use windflex_core::Error as E;
        match self {
            IoError::Parse { .. }
            | IoError::RangeViolation { .. }
            | IoError::GapDetected { .. }
            | IoError::Invalid { .. } => true,
            IoError::Io { .. } => false,
            IoError::Model { source, .. } => matches!(
                source,
                E::InvalidParameter { .. }
                    | E::ShapeMismatch(_)
                    | E::DomainError { .. }
                    | E::NonFinite { .. }
                    | E::InsufficientData { .. }
                    | E::WrongHorizon { .. }
                    | E::GridMismatch
                    | E::EmptySurface
            ),
        }
    }

    /// Process exit status: 1 for invalid input, 2 for runtime failures.
    pub fn exit_code(&self) -> u8 {
        if self.is_validation() {
            1
        } else {
            2
        }
    }
}

pub(crate) fn display(path: &Path) -> String {
    path.display().to_string()
}
