use thiserror::Error;

use crate::csoc::Violation;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("generator {generator}: {reason}")]
    MalformedTaps { generator: usize, reason: String },

    #[error("code is not self-orthogonal: {0}")]
    NotSelfOrthogonal(Violation),

    #[error("generators have non-uniform tap counts (generator 0 has {expected}, generator {generator} has {found})")]
    NonUniformTapCount {
        generator: usize,
        expected: usize,
        found: usize,
    },

    #[error("code description is inconsistent: {0}")]
    InconsistentCode(String),

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("coupled time {index} out of range (frame has {len} coupled blocks)")]
    OutOfRange { index: usize, len: usize },

    #[error("empirical tap-count estimate is undefined for k = 1; use exact mode")]
    EmpiricalUndefined,

    #[error("existing results were produced by config {found}, current config is {expected}")]
    ConfigHashMismatch { expected: String, found: String },

    #[error("malformed input: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
