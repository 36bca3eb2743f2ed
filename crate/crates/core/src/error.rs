//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A channel identifier was empty after trimming and normalization.
    #[error("malformed channel identifier: {0:?} is empty after normalization")]
    MalformedId(String),

    /// A metric is undefined on the given graph (too few nodes, no reachable
    /// pair, no edges).
    #[error("undefined metric: {0}")]
    UndefinedMetric(String),

    /// Power iteration did not reach the requested tolerance.
    #[error("eigenvector power iteration did not converge after {iterations} iterations (residual {residual:e}, tolerance {tolerance:e})")]
    NotConverged {
        iterations: usize,
        residual: f64,
        tolerance: f64,
    },

    /// A partition does not cover exactly the node set of the graph.
    #[error("partition mismatch: {0}")]
    PartitionMismatch(String),

    /// Bridge score requested on metrics whose normalized fields were never
    /// populated.
    #[error("missing normalized metric: {0}")]
    MissingMetric(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Structured-input parse failure (edge list, GEXF, CSV header).
    #[error("parse error: {0}")]
    Parse(String),

    /// A required CSV column is absent from the header row.
    #[error("missing required column {column:?} in {file}")]
    MissingColumn { file: String, column: String },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}
