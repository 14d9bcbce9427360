use thiserror::Error;

/// Errors raised across the library. Verification failures are data, not errors.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("degree overflow: {p} + {q} exceeds dimension {n}")]
    DegreeOverflow { p: usize, q: usize, n: usize },
    #[error("degree error: {0}")]
    Degree(String),
    #[error("rank error: source dimension {source_dim} exceeds target dimension {target_dim}; the top exterior power vanishes (lhs = 0)")]
    Rank { source_dim: usize, target_dim: usize },
    #[error("metric is not symmetric positive-definite: {0}")]
    NotPositiveDefinite(String),
    #[error("frame is not orthonormal (Gram defect {0:e})")]
    NotOrthonormal(f64),
    #[error("unknown calibration `{name}` in dimension {dim}")]
    UnknownCalibration { name: String, dim: usize },
    #[error("unknown model `{0}`")]
    UnknownModel(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("missing data: {0}")]
    MissingData(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
