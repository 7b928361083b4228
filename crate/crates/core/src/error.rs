use thiserror::Error;

/// Errors raised by the miners and their supporting tooling.
#[derive(Debug, Error)]
pub enum MineError {
    #[error("invalid itemset: {0}")]
    InvalidItemset(String),
    #[error("invalid split: {0}")]
    InvalidSplit(String),
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("invalid data: {0}")]
    InvalidData(String),
    #[error("confidence undefined: antecedent has zero support")]
    UndefinedConfidence,
    #[error("lift undefined: a marginal support is zero")]
    UndefinedLift,
    #[error("matrix is not symmetric: |K[{row}][{col}] - K[{col}][{row}]| = {gap:e}")]
    NonSymmetric { row: usize, col: usize, gap: f64 },
    #[error("matrix is not positive semi-definite (min eigenvalue {min_eigenvalue:e}); enable psd repair to use this kernel")]
    NotPsd { min_eigenvalue: f64 },
    #[error("kernel error: {0}")]
    Kernel(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("{what} exceeds the supported limit of {limit} (got {got})")]
    TooLarge { what: &'static str, limit: usize, got: usize },
    #[error("parse error at row {row}, column {column}: {message}")]
    Parse { row: usize, column: String, message: String },
    #[error("training diverged at episode {episode}, step {step}: {message}")]
    Diverged { episode: usize, step: usize, message: String },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, MineError>;
