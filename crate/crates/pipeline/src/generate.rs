use serde::{Deserialize, Serialize};
use shexgen_core::{parse_shexc, serialize_shexc, Iri, Schema};
use shexgen_kg::GlobalPredicateRecord;

use crate::assemble::{assemble_schema, Part};
use crate::error::GenerationError;
use crate::llm::{Exchange, LlmClient, ResponseFormat};
use crate::ml::{extract_features, CardinalityModel};
use crate::prompt::{ChatPrompt, Exemplars, Message};
use crate::structured::{
    predict_cardinality_structured, predict_node_constraint_structured, StructuredCardinality, DEFAULT_STRUCTURED_RETRIES,
};

pub const DEFAULT_MAX_REPAIRS: usize = 2;

#[derive(Debug, Clone, PartialEq)]
pub struct Generated {
    pub schema: Schema,
    pub transcript: Vec<Exchange>,
    /// Predicates dropped because their steps failed, with the reason.
    pub skipped: Vec<(Iri, String)>,
    pub parts: Vec<Part>,
}

/// The ShEx text inside a reply, without code fences.
pub fn extract_shex(reply: &str) -> &str {
    let trimmed = reply.trim();
    if let Some(start) = trimmed.find("```") {
        let after = &trimmed[start + 3..];
        let body_start = after.find('\n').map_or(after.len(), |i| i + 1);
        let body = &after[body_start..];
        return body.find("```").map_or(body, |end| &body[..end]);
    }
    trimmed
}

/// Sends an end-to-end prompt and re-prompts with parser diagnostics until a
/// schema parses and serializes, or `max_repairs` follow-ups are spent.
pub fn generate_end_to_end(prompt: &ChatPrompt, class: &Iri, client: &dyn LlmClient, max_repairs: usize) -> Result<Generated, GenerationError> {
    let mut messages = prompt.messages();
    let mut transcript = Vec::new();
    let mut diagnostics = String::new();
    for _ in 0..=max_repairs {
        let reply = client.complete(&messages, ResponseFormat::Text)?;
        transcript.push(Exchange::new(&messages, reply.clone()));
        let problem = match parse_shexc(extract_shex(&reply)) {
            Ok(schema) => {
                let schema = schema.with_focus_class(class.clone());
                match serialize_shexc(&schema) {
                    Ok(_) => return Ok(Generated { schema, transcript, skipped: Vec::new(), parts: Vec::new() }),
                    Err(e) => e.to_string(),
                }
            }
            Err(e) => e.to_string(),
        };
        messages.push(Message::assistant(reply));
        messages.push(Message::user(format!(
            "The schema is not valid ShEx:\n{problem}\nReturn the corrected complete ShEx schema."
        )));
        diagnostics = problem;
    }
    Err(GenerationError::GenerationFailed { attempts: max_repairs + 1, diagnostics, transcript })
}

#[derive(Debug, Clone, Default)]
pub enum CardinalitySource {
    #[default]
    Llm,
    /// The LLM still decides inclusion; the model supplies the bounds.
    Ml(Box<CardinalityModel>),
}

impl CardinalitySource {
    pub fn name(&self) -> String {
        match self {
            CardinalitySource::Llm => "llm".into(),
            CardinalitySource::Ml(m) => m.kind.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GlobalOptions {
    pub typing_predicate: Iri,
    pub retries: usize,
}

impl GlobalOptions {
    pub fn new(typing_predicate: Iri) -> Self {
        GlobalOptions { typing_predicate, retries: DEFAULT_STRUCTURED_RETRIES }
    }
}

fn is_recoverable(e: &GenerationError) -> bool {
    matches!(e, GenerationError::StructuredOutputFailed { .. } | GenerationError::Prompt(_))
}

/// Two-step structured generation: bounds (or exclusion) per predicate,
/// then a node constraint for each accepted predicate, then assembly.
pub fn generate_global(
    class: &Iri,
    records: &[GlobalPredicateRecord],
    client: &dyn LlmClient,
    source: &CardinalitySource,
    exemplars: &Exemplars,
    opts: &GlobalOptions,
) -> Result<Generated, GenerationError> {
    let mut transcript = Vec::new();
    let mut skipped = Vec::new();
    let mut parts = Vec::new();
    for record in records {
        if record.predicate_uri == opts.typing_predicate {
            continue;
        }
        let step_one = predict_cardinality_structured(record, client, &exemplars.global_cardinality, opts.retries, &mut transcript);
        let mut cardinality = match step_one {
            Ok(c) => c,
            Err(e) if is_recoverable(&e) => {
                log::warn!("{}: skipping {}: {e}", class, record.predicate_uri);
                skipped.push((record.predicate_uri.clone(), e.to_string()));
                continue;
            }
            Err(e) => return Err(e),
        };
        if !cardinality.include {
            continue;
        }
        if let CardinalitySource::Ml(model) = source {
            let features = extract_features(record).map_err(|e| GenerationError::Ml(e.to_string()))?;
            cardinality = StructuredCardinality::included(model.predict(&features));
        }
        let node = match predict_node_constraint_structured(record, client, &exemplars.global_node, opts.retries, &mut transcript) {
            Ok(n) => n,
            Err(e) if is_recoverable(&e) => {
                log::warn!("{}: skipping {}: {e}", class, record.predicate_uri);
                skipped.push((record.predicate_uri.clone(), e.to_string()));
                continue;
            }
            Err(e) => return Err(e),
        };
        parts.push(Part { predicate: record.predicate_uri.clone(), cardinality, node });
    }
    let schema = assemble_schema(class, &parts, &opts.typing_predicate)?;
    Ok(Generated { schema, transcript, skipped, parts })
}
