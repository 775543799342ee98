use std::path::PathBuf;

use thiserror::Error;

/// Process exit codes.
pub const EXIT_OK: u8 = 0;
pub const EXIT_VERIFY_FAILED: u8 = 1;
pub const EXIT_INVALID_INPUT: u8 = 2;
pub const EXIT_SOLVER_FAILURE: u8 = 3;
pub const EXIT_DEGENERATE: u8 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: malformed state file: {source}")]
    Parse {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("{path}: unsupported basis tag {tag:?} (expected \"AB-comp\")")]
    Basis { path: PathBuf, tag: String },

    #[error("invalid input: {0}")]
    Invalid(qfidelity::Error),

    #[error("solver failure: {0}")]
    Solver(qfidelity::Error),

    #[error("degenerate normal form: {0}")]
    Degenerate(qfidelity::Error),

    #[error("verification failed in suite {0}")]
    VerifyFailed(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io { .. } | CliError::Parse { .. } | CliError::Basis { .. } | CliError::Invalid(_) => {
                EXIT_INVALID_INPUT
            }
            CliError::Solver(_) => EXIT_SOLVER_FAILURE,
            CliError::Degenerate(_) => EXIT_DEGENERATE,
            CliError::VerifyFailed(_) => EXIT_VERIFY_FAILED,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> CliError {
        let path = path.into();
        move |source| CliError::Io { path, source }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
