use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("graph has no edges after cleanup")]
    EmptyGraph,

    #[error("partition does not cover the graph: {0}")]
    PartitionMismatch(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    Dimension { expected: usize, actual: usize },

    #[error("formulation would need {rows} rows, over the cap of {cap}")]
    Capacity { rows: u128, cap: u128 },

    #[error("exhaustive enumeration would need {count} assignments, over the cap of {cap}")]
    EnumerationBlowup { count: u128, cap: u128 },

    #[error("degree sequence is not graphical: Erdos-Gallai condition fails at index {index}")]
    NotGraphical { index: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("solver hit its {0} limit")]
    SolverLimit(&'static str),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
