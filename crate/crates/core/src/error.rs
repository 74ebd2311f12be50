//! Error type shared across the toolkit.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A record-level problem that aborts the whole run (e.g. the same
    /// pub_id seen twice with different fields).
    #[error("conflicting data: {0}")]
    Conflict(String),

    /// Caller violated an operation precondition.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The requested statistic has no defined value for this input
    /// (all-zero Gini vector, cohort with fewer than two members, ...).
    #[error("not computable: {0}")]
    NotComputable(String),

    /// Simulation parameters would produce runaway growth.
    #[error("simulation guard tripped: {0}")]
    SimulationGuard(String),

    /// A pipeline stage was invoked before its inputs exist, or on stale
    /// artifacts produced under a different configuration.
    #[error("pipeline: {0}")]
    Pipeline(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}
