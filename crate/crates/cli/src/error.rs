use shexgen_kg::KgError;
use shexgen_pipeline::{GenerationError, LlmError};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("network error: {0}")]
    Network(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("{failed} of {total} classes failed")]
    Partial { failed: usize, total: usize },
    #[error("offline replay miss: {0}")]
    CacheMiss(String),
    #[error("{0}")]
    Other(String),
}

impl CliError {
    pub const OK: i32 = 0;

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Other(_) => 1,
            CliError::Config(_) => 2,
            CliError::Network(_) => 3,
            CliError::Parse(_) => 4,
            CliError::Partial { .. } => 5,
            CliError::CacheMiss(_) => 6,
        }
    }
}

impl From<KgError> for CliError {
    fn from(e: KgError) -> Self {
        match e {
            KgError::CacheMiss { .. } => CliError::CacheMiss(e.to_string()),
            KgError::Config(m) => CliError::Config(m),
            KgError::Io(m) => CliError::Other(m),
            e => CliError::Network(e.to_string()),
        }
    }
}

impl From<LlmError> for CliError {
    fn from(e: LlmError) -> Self {
        match e {
            LlmError::StubMiss { .. } => CliError::CacheMiss(e.to_string()),
            LlmError::Provider(_) => CliError::Network(e.to_string()),
            LlmError::Config(m) => CliError::Config(m),
            LlmError::Exhausted | LlmError::Io(_) => CliError::Other(e.to_string()),
        }
    }
}

impl From<GenerationError> for CliError {
    fn from(e: GenerationError) -> Self {
        match e {
            GenerationError::Kg(k) => k.into(),
            GenerationError::Llm(l) => l.into(),
            GenerationError::GenerationFailed { .. } | GenerationError::StructuredOutputFailed { .. } => CliError::Parse(e.to_string()),
            e => CliError::Other(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Other(e.to_string())
    }
}
