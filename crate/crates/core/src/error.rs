// SPDX-License-Identifier: MIT OR Apache-2.0

use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("ingestion error at row {row}, column '{column}': {message}")]
    Ingestion {
        row: usize,
        column: String,
        message: String,
    },

    #[error("schema error: {0}")]
    Schema(String),

    #[error("degenerate features with zero variance: {}", .0.join(", "))]
    DegenerateFeatures(Vec<String>),

    #[error("index {index} out of range for {len} rows")]
    Index { index: usize, len: usize },

    #[error("capability error: {0}")]
    Capability(String),

    #[error("numeric error at iteration {iteration}: {message}")]
    Numeric { iteration: usize, message: String },

    #[error("training diverged ({0}); try a smaller learning rate")]
    Divergence(String),

    #[error("unsupported model kind '{0}'")]
    UnsupportedKind(String),

    #[error("unsupported format version {found} (expected {expected})")]
    Version { found: u64, expected: u64 },

    #[error("search failed: {0}")]
    SearchFailed(String),

    #[error("parse error: {0}")]
    Parse(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn capability(msg: impl Into<String>) -> Self {
        Error::Capability(msg.into())
    }
}
