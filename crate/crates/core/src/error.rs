use thiserror::Error;

/// Errors raised by sampling, geometry, event evaluation and estimation.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid window: {0}")]
    InvalidWindow(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("extension region overlaps the already sampled region")]
    OverlappingRegion,

    #[error("duplicate sites {first} and {second} at the same position")]
    DuplicateSite { first: usize, second: usize },

    #[error("operation requires a non-empty sample")]
    EmptySample,

    #[error("query region is not contained in the sampled region")]
    OutsideSampledRegion,

    #[error("query region is not inside the certified window")]
    Uncertified,

    #[error(
        "determinism certificate still failing after {shells} padding shells \
         (max nearest distance {max_nearest:.4}, margin {margin:.4})"
    )]
    CertificateAbort {
        shells: usize,
        max_nearest: f64,
        margin: f64,
    },

    #[error("{aborted} of {attempted} trials aborted on the determinism certificate")]
    AbortStorm { aborted: u64, attempted: u64 },

    #[error("checkpoint line {line}: {message}")]
    Checkpoint { line: usize, message: String },

    #[error("checkpoint does not match this run: {0}")]
    CheckpointMismatch(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
