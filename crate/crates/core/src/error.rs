use thiserror::Error;

use crate::workspace::VertexId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed map, table or configuration text.
    #[error("format error at line {line}: {message}")]
    Format { line: usize, message: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("unknown vertex {0}")]
    UnknownVertex(VertexId),

    #[error("path is infeasible: states {index} and {} are not adjacent", index + 1)]
    Infeasible { index: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    /// A search or enumeration would exceed its configured budget.
    #[error("resource budget exceeded: {what} needs {required}, budget is {budget}")]
    Budget { what: String, required: u128, budget: u128 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn format(line: usize, message: impl Into<String>) -> Self {
        Error::Format {
            line,
            message: message.into(),
        }
    }
}
