//! Validated JSON replies for the two global steps.

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use shexgen_core::{vocab, Cardinality, Iri, Literal, Max, PrefixMap, ValueSetItem};

use crate::error::GenerationError;
use crate::llm::{Exchange, LlmClient, ResponseFormat};
use crate::prompt::{build_global_prompt, ChatPrompt, Exemplar, Message, CARDINALITY_INSTRUCTION, NODE_INSTRUCTION};
use shexgen_kg::GlobalPredicateRecord;

pub const DEFAULT_STRUCTURED_RETRIES: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructuredCardinality {
    pub include: bool,
    pub min: u32,
    pub max: Max,
}

impl StructuredCardinality {
    pub fn included(c: Cardinality) -> Self {
        StructuredCardinality { include: true, min: c.min(), max: c.max() }
    }

    pub fn excluded() -> Self {
        StructuredCardinality { include: false, min: 0, max: Max::Unbounded }
    }

    /// The bounds, or `None` when the predicate is excluded.
    pub fn cardinality(&self) -> Option<Cardinality> {
        if self.include {
            Cardinality::new(self.min, self.max).ok()
        } else {
            None
        }
    }

    pub fn parse(reply: &str) -> Result<Self, String> {
        let obj = json_object(reply)?;
        let include = match obj.get("include") {
            None => true,
            Some(Value::Bool(b)) => *b,
            Some(other) => return Err(format!("\"include\" must be a boolean, got {other}")),
        };
        if !include {
            return Ok(StructuredCardinality::excluded());
        }
        let min = match obj.get("min") {
            Some(Value::Number(n)) => n.as_u64().and_then(|v| u32::try_from(v).ok()).ok_or_else(|| format!("\"min\" must be a natural number, got {n}"))?,
            Some(other) => return Err(format!("\"min\" must be a natural number, got {other}")),
            None => return Err("missing \"min\"".into()),
        };
        let max = match obj.get("max") {
            Some(Value::Number(n)) if n.as_i64() == Some(-1) => Max::Unbounded,
            Some(Value::Number(n)) => Max::Bounded(
                n.as_u64().and_then(|v| u32::try_from(v).ok()).ok_or_else(|| format!("\"max\" must be a natural number or \"*\", got {n}"))?,
            ),
            Some(Value::String(s)) if matches!(s.trim(), "*" | "unbounded" | "inf" | "infinity") => Max::Unbounded,
            Some(Value::String(s)) => Max::Bounded(s.trim().parse().map_err(|_| format!("\"max\" must be a natural number or \"*\", got {s:?}"))?),
            Some(other) => return Err(format!("\"max\" must be a natural number or \"*\", got {other}")),
            None => return Err("missing \"max\"".into()),
        };
        Cardinality::new(min, max).map_err(|e| e.to_string())?;
        if max == Max::Bounded(0) {
            return Err("\"max\" must be at least 1 for an included predicate".into());
        }
        Ok(StructuredCardinality { include, min, max })
    }

    pub fn to_json(&self) -> String {
        let max = match self.max {
            Max::Bounded(m) => Value::from(m),
            Max::Unbounded => Value::from("*"),
        };
        serde_json::json!({ "include": self.include, "min": self.min, "max": max }).to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StructuredNodeConstraint {
    Datatype(Iri),
    ReferencedClasses(Vec<Iri>),
    ValueList(Vec<ValueSetItem>),
    NodeKindIri,
}

fn resolve_iri(s: &str, pm: &PrefixMap) -> Option<Iri> {
    let s = s.trim();
    if let Some(inner) = s.strip_prefix('<').and_then(|r| r.strip_suffix('>')) {
        return Iri::new(inner).ok();
    }
    if s.contains("://") || s.starts_with("urn:") {
        return Iri::new(s).ok();
    }
    let (prefix, local) = s.split_once(':')?;
    pm.expand(prefix, local)
}

fn value_item(v: &Value, pm: &PrefixMap) -> Result<ValueSetItem, String> {
    match v {
        Value::String(s) => Ok(match resolve_iri(s, pm) {
            Some(iri) => ValueSetItem::Iri(iri),
            None => ValueSetItem::Literal(Literal::string(s.clone())),
        }),
        Value::Number(n) => {
            let dt = if n.is_i64() || n.is_u64() { vocab::XSD_INTEGER } else { vocab::XSD_DECIMAL };
            Ok(ValueSetItem::Literal(Literal::typed(n.to_string(), Iri::from_static(dt))))
        }
        Value::Bool(b) => Ok(ValueSetItem::Literal(Literal::typed(b.to_string(), Iri::from_static(vocab::XSD_BOOLEAN)))),
        other => Err(format!("unsupported value {other}")),
    }
}

impl StructuredNodeConstraint {
    pub fn parse(reply: &str, pm: &PrefixMap) -> Result<Self, String> {
        let obj = json_object(reply)?;
        let present: Vec<&str> = ["datatype", "referenced_classes", "value_list", "node_kind"]
            .into_iter()
            .filter(|k| obj.get(*k).is_some_and(|v| !v.is_null()))
            .collect();
        match present.as_slice() {
            [] => Ok(StructuredNodeConstraint::NodeKindIri),
            ["datatype"] => {
                let s = obj["datatype"].as_str().ok_or("\"datatype\" must be a string")?;
                resolve_iri(s, pm).map(StructuredNodeConstraint::Datatype).ok_or_else(|| format!("unknown datatype {s:?}"))
            }
            ["referenced_classes"] => {
                let items = obj["referenced_classes"].as_array().ok_or("\"referenced_classes\" must be a list")?;
                if items.is_empty() {
                    return Err("\"referenced_classes\" must not be empty".into());
                }
                let mut classes = Vec::with_capacity(items.len());
                for item in items {
                    let s = item.as_str().ok_or("class entries must be strings")?;
                    let iri = resolve_iri(s, pm).ok_or_else(|| format!("cannot resolve class {s:?}"))?;
                    if !classes.contains(&iri) {
                        classes.push(iri);
                    }
                }
                Ok(StructuredNodeConstraint::ReferencedClasses(classes))
            }
            ["value_list"] => {
                let items = obj["value_list"].as_array().ok_or("\"value_list\" must be a list")?;
                if items.is_empty() {
                    return Err("\"value_list\" must not be empty".into());
                }
                let mut values: Vec<ValueSetItem> = Vec::with_capacity(items.len());
                for item in items {
                    let v = value_item(item, pm)?;
                    if !values.contains(&v) {
                        values.push(v);
                    }
                }
                let iris = values.iter().filter(|v| v.as_iri().is_some()).count();
                if iris != 0 && iris != values.len() {
                    return Err("\"value_list\" mixes IRIs and literals".into());
                }
                Ok(StructuredNodeConstraint::ValueList(values))
            }
            ["node_kind"] => match obj["node_kind"].as_str().map(str::trim) {
                Some(k) if k.eq_ignore_ascii_case("iri") => Ok(StructuredNodeConstraint::NodeKindIri),
                other => Err(format!("unsupported node kind {other:?}; only \"IRI\" is allowed")),
            },
            many => Err(format!("expected exactly one node constraint key, found {}", many.join(", "))),
        }
    }

    pub fn to_json(&self, pm: &PrefixMap) -> String {
        let short = |i: &Iri| pm.compact(i.as_str()).unwrap_or_else(|| i.as_str().to_owned());
        let v = match self {
            StructuredNodeConstraint::Datatype(d) => serde_json::json!({ "datatype": short(d) }),
            StructuredNodeConstraint::ReferencedClasses(c) => {
                serde_json::json!({ "referenced_classes": c.iter().map(short).collect::<Vec<_>>() })
            }
            StructuredNodeConstraint::ValueList(values) => {
                let items: Vec<Value> = values
                    .iter()
                    .map(|v| match v {
                        ValueSetItem::Iri(i) => Value::from(short(i)),
                        ValueSetItem::Literal(l) => Value::from(l.lexical.clone()),
                    })
                    .collect();
                serde_json::json!({ "value_list": items })
            }
            StructuredNodeConstraint::NodeKindIri => serde_json::json!({ "node_kind": "IRI" }),
        };
        v.to_string()
    }
}

/// The JSON object in a reply, tolerating code fences and surrounding prose.
pub fn json_object(reply: &str) -> Result<Map<String, Value>, String> {
    let start = reply.find('{').ok_or("reply contains no JSON object")?;
    let end = reply.rfind('}').ok_or("reply contains no JSON object")?;
    if end < start {
        return Err("reply contains no JSON object".into());
    }
    match serde_json::from_str::<Value>(&reply[start..=end]) {
        Ok(Value::Object(m)) => Ok(m),
        Ok(_) => Err("reply is not a JSON object".into()),
        Err(e) => Err(format!("invalid JSON: {e}")),
    }
}

/// Sends `prompt`, re-requesting with the validation error until `parse`
/// accepts a reply or the retry budget is spent.
pub fn request_structured<T>(
    client: &dyn LlmClient,
    prompt: &ChatPrompt,
    retries: usize,
    transcript: &mut Vec<Exchange>,
    parse: impl Fn(&str) -> Result<T, String>,
) -> Result<T, GenerationError> {
    let mut messages = prompt.messages();
    let mut last_error = String::new();
    for attempt in 0..=retries {
        let reply = client.complete(&messages, ResponseFormat::Json)?;
        transcript.push(Exchange::new(&messages, reply.clone()));
        match parse(&reply) {
            Ok(v) => return Ok(v),
            Err(e) => {
                log::debug!("structured reply rejected on attempt {}: {e}", attempt + 1);
                messages.push(Message::assistant(reply));
                messages.push(Message::user(format!("The reply is invalid: {e}. Answer again with a single JSON object.")));
                last_error = e;
            }
        }
    }
    Err(GenerationError::StructuredOutputFailed { message: last_error, transcript: transcript.clone() })
}

pub fn cardinality_prompt(record: &GlobalPredicateRecord, fewshot: &[Exemplar]) -> Result<ChatPrompt, GenerationError> {
    Ok(build_global_prompt(record, fewshot)?.with_instruction(CARDINALITY_INSTRUCTION))
}

pub fn node_prompt(record: &GlobalPredicateRecord, fewshot: &[Exemplar]) -> Result<ChatPrompt, GenerationError> {
    Ok(build_global_prompt(record, fewshot)?.with_instruction(NODE_INSTRUCTION))
}

pub fn predict_cardinality_structured(
    record: &GlobalPredicateRecord,
    client: &dyn LlmClient,
    fewshot: &[Exemplar],
    retries: usize,
    transcript: &mut Vec<Exchange>,
) -> Result<StructuredCardinality, GenerationError> {
    let prompt = cardinality_prompt(record, fewshot)?;
    request_structured(client, &prompt, retries, transcript, StructuredCardinality::parse)
}

pub fn predict_node_constraint_structured(
    record: &GlobalPredicateRecord,
    client: &dyn LlmClient,
    fewshot: &[Exemplar],
    retries: usize,
    transcript: &mut Vec<Exchange>,
) -> Result<StructuredNodeConstraint, GenerationError> {
    let prompt = node_prompt(record, fewshot)?;
    let pm = PrefixMap::well_known();
    request_structured(client, &prompt, retries, transcript, |r| StructuredNodeConstraint::parse(r, &pm))
}
