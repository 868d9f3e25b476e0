use std::io;

use thiserror::Error;

/// Process exit codes.
pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{0}")]
    CheckFailed(String),

    #[error(transparent)]
    Run(#[from] voronoi_rsw::Error),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use voronoi_rsw::Error as E;
        match self {
            CliError::Usage(_) | CliError::Json(_) => EXIT_USAGE,
            CliError::Run(E::InvalidParameter(_) | E::InvalidWindow(_)) => EXIT_USAGE,
            _ => EXIT_FAILURE,
        }
    }
}

pub(crate) fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

pub type Result<T> = std::result::Result<T, CliError>;
