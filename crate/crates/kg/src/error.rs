use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KgError {
    #[error("endpoint returned HTTP {status}: {message}")]
    Http { status: u16, message: String },
    #[error("request failed: {0}")]
    Transport(String),
    #[error("request timed out")]
    Timeout,
    #[error("malformed SPARQL results: {0}")]
    Malformed(String),
    #[error("offline mode: no cached result for key {key}")]
    CacheMiss { key: String },
    #[error("cache I/O error: {0}")]
    Io(String),
    #[error("{0}")]
    Config(String),
}

impl KgError {
    /// True for failures caused by the network or the remote endpoint.
    pub fn is_network(&self) -> bool {
        matches!(self, KgError::Http { .. } | KgError::Transport(_) | KgError::Timeout)
    }

    pub fn is_retryable(&self) -> bool {
        match self {
            KgError::Http { status, .. } => *status == 429 || *status >= 500,
            KgError::Transport(_) | KgError::Timeout => true,
            _ => false,
        }
    }
}

impl From<std::io::Error> for KgError {
    fn from(e: std::io::Error) -> Self {
        KgError::Io(e.to_string())
    }
}
