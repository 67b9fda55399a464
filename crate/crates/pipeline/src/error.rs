use shexgen_core::{Iri, ModelError};
use shexgen_kg::KgError;
use thiserror::Error;

use crate::llm::{Exchange, LlmError};
use crate::prompt::PromptError;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AssemblyError {
    #[error("no predicates left to assemble")]
    Empty,
    #[error("predicate {0} appears more than once")]
    DuplicatePredicate(Iri),
    #[error("predicate {0} is the typing predicate")]
    TypingPredicate(Iri),
    #[error("invalid cardinality for {0}")]
    InvalidCardinality(Iri),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GenerationError {
    #[error(transparent)]
    Prompt(#[from] PromptError),
    #[error(transparent)]
    Llm(#[from] LlmError),
    #[error(transparent)]
    Kg(#[from] KgError),
    #[error(transparent)]
    Assembly(#[from] AssemblyError),
    #[error("structured output rejected after retries: {message}")]
    StructuredOutputFailed { message: String, transcript: Vec<Exchange> },
    #[error("no valid schema after {attempts} attempts:\n{diagnostics}")]
    GenerationFailed { attempts: usize, diagnostics: String, transcript: Vec<Exchange> },
    #[error("cardinality model: {0}")]
    Ml(String),
}
