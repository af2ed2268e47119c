use thiserror::Error;

use crate::topology::NodeId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An analytic function was called outside its domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// A configuration value violates an invariant.
    #[error("invalid config `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("unknown node {0}")]
    UnknownNode(NodeId),

    /// The engine detected a broken internal invariant. Always a bug.
    #[error("engine invariant violated: {0}")]
    Invariant(String),

    #[error("malformed deployment file, line {line}: {message}")]
    Deployment { line: usize, message: String },

    #[error("run failed for protocol {protocol} seed {seed}: {source}")]
    Run {
        protocol: String,
        seed: u64,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn config(key: &str, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.to_string(),
            message: message.into(),
        }
    }
}
