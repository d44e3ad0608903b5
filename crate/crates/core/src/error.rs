use thiserror::Error;

use crate::community::Violation;

pub type Result<T> = std::result::Result<T, DgtError>;

#[derive(Debug, Error)]
pub enum DgtError {
    #[error("no edges")]
    NoEdges,

    #[error("format error at line {line}: {message}")]
    Format { line: usize, message: String },

    /// A snapshot ended up with zero edges, so every `1/m` normalizer is undefined.
    #[error("empty graph: snapshot {snapshot} has no edges")]
    EmptyGraph { snapshot: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("community structure failed audit: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Audit(Vec<Violation>),

    #[error("internal error: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl DgtError {
    pub(crate) fn format(line: usize, message: impl Into<String>) -> Self {
        DgtError::Format {
            line,
            message: message.into(),
        }
    }
}
