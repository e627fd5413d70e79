use std::path::{Path, PathBuf};

use aptqfi_core::Error;
use thiserror::Error as ThisError;

/// Exit status of a successful run.
pub const EXIT_OK: i32 = 0;
/// Malformed or inconsistent configuration, including rejected parameters.
pub const EXIT_CONFIG: i32 = 2;
/// Singular response, unstable dynamics or vanishing information.
pub const EXIT_PHYSICS: i32 = 3;
/// Fock truncation too small, integrator failure or eigensolver failure.
pub const EXIT_NUMERICS: i32 = 4;
pub const EXIT_IO: i32 = 5;

#[derive(Debug, ThisError)]
pub enum CliError {
    #[error("config error in {field}: {message}")]
    Config { field: String, message: String },

    #[error(transparent)]
    Library(#[from] Error),

    #[error("I/O error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } => EXIT_CONFIG,
            CliError::Library(e) => library_exit_code(e),
            CliError::Io { .. } => EXIT_IO,
        }
    }
}

pub fn library_exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidParams(_) | Error::DimensionMismatch { .. } | Error::InsufficientGrid { .. } => EXIT_CONFIG,
        Error::SingularResponse { .. } | Error::Unstable { .. } | Error::ZeroInformation => EXIT_PHYSICS,
        Error::TruncationTooSmall { .. } | Error::StepFailure { .. } | Error::Eigen => EXIT_NUMERICS,
    }
}

/// Short machine-readable tag written into `status` columns.
pub fn status_tag(e: &Error) -> &'static str {
    match e {
        Error::InvalidParams(_) => "invalid_params",
        Error::SingularResponse { .. } => "singular",
        Error::Unstable { .. } => "unstable",
        Error::TruncationTooSmall { .. } => "truncation",
        Error::StepFailure { .. } => "step_failure",
        Error::InsufficientGrid { .. } => "insufficient_grid",
        Error::ZeroInformation => "zero_information",
        Error::DimensionMismatch { .. } => "dimension_mismatch",
        Error::Eigen => "eigen",
    }
}
