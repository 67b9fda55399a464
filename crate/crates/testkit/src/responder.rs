//! A rule-based stand-in for a chat model that answers from known schemas.
//! Its answers are deliberately imperfect in fixed, hash-chosen places so
//! evaluations have something to measure.

use serde_json::{json, Value};
use shexgen_core::{serialize_shexc, vocab, Iri, Max, NodeConstraint, PrefixMap, Schema, TripleConstraint, ValueSetItem};
use shexgen_pipeline::prompt::{Role, CARDINALITY_INSTRUCTION, NODE_INSTRUCTION};
use shexgen_pipeline::{LlmClient, LlmError, Message, ResponseFormat};

pub const RESPONDER_MODEL: &str = "synthetic-responder";

const LOCAL_OPENING: &str = "Based on the information, generate the ShEx schema for the class '";
const TRIPLES_OPENING: &str = "Generate a ShEx schema for the class '";

fn fnv(s: &str) -> u64 {
    s.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3))
}

pub struct SyntheticResponder {
    schemas: Vec<Schema>,
}

fn quoted_after<'a>(text: &'a str, key: &str) -> Option<&'a str> {
    let rest = &text[text.find(key)? + key.len()..];
    let end = rest.find(['\'', ' ']).unwrap_or(rest.len());
    Some(&rest[..end])
}

fn is_typing(tc: &TripleConstraint) -> bool {
    vocab::TYPING_PREDICATES.contains(&tc.predicate.as_str())
}

impl SyntheticResponder {
    pub fn new(schemas: Vec<Schema>) -> Self {
        SyntheticResponder { schemas }
    }

    fn schema_for(&self, class: &str) -> Result<&Schema, LlmError> {
        self.schemas
            .iter()
            .find(|s| s.focus_class().as_str() == class)
            .ok_or_else(|| LlmError::Provider(format!("no schema known for class {class}")))
    }

    fn cardinality(&self, task: &str, retry: bool) -> Result<String, LlmError> {
        let class = quoted_after(task, "'class_uri': '").unwrap_or_default();
        let predicate = quoted_after(task, "'predicate_uri': '").unwrap_or_default();
        let schema = self.schema_for(class)?;
        let h = fnv(&format!("{class} {predicate}"));
        let Some(tc) = schema.start_shape().constraints.iter().find(|tc| tc.predicate.as_str() == predicate) else {
            return Ok(json!({ "include": false }).to_string());
        };
        if h % 5 == 1 && !retry {
            return Ok(r#"{"include": true, "min": 2, "max": 1}"#.to_owned());
        }
        let mut min = tc.cardinality.min();
        if h.is_multiple_of(4) {
            min = 0;
        }
        let max = match tc.cardinality.max() {
            Max::Bounded(m) => Value::from(m.max(min)),
            Max::Unbounded => Value::from("*"),
        };
        Ok(format!("```json\n{}\n```", json!({ "include": true, "min": min, "max": max })))
    }

    fn node(&self, task: &str) -> Result<String, LlmError> {
        let class = quoted_after(task, "'class_uri': '").unwrap_or_default();
        let predicate = quoted_after(task, "'predicate_uri': '").unwrap_or_default();
        let schema = self.schema_for(class)?;
        let pm = PrefixMap::well_known();
        let short = |i: &Iri| pm.compact(i.as_str()).unwrap_or_else(|| i.as_str().to_owned());
        let Some(tc) = schema.start_shape().constraints.iter().find(|tc| tc.predicate.as_str() == predicate) else {
            return Ok("{}".to_owned());
        };
        let v = match &tc.node {
            NodeConstraint::Datatype(d) => json!({ "datatype": short(d) }),
            NodeConstraint::ShapeRef(label) => {
                let classes: Vec<String> = schema.shape(label).map(|s| s.typing_classes_ordered()).unwrap_or_default().iter().map(short).collect();
                if classes.is_empty() {
                    json!({})
                } else {
                    json!({ "referenced_classes": classes })
                }
            }
            NodeConstraint::ValueSet(items) => {
                let values: Vec<Value> = items
                    .iter()
                    .map(|i| match i {
                        ValueSetItem::Iri(iri) => Value::from(short(iri)),
                        ValueSetItem::Literal(l) => Value::from(l.lexical.clone()),
                    })
                    .collect();
                json!({ "value_list": values })
            }
            NodeConstraint::NodeKindIri if fnv(predicate).is_multiple_of(2) => json!({}),
            NodeConstraint::NodeKindIri => json!({ "node_kind": "IRI" }),
        };
        Ok(v.to_string())
    }

    fn full_schema(&self, task: &str, local: bool, repairing: bool) -> Result<String, LlmError> {
        let opening = if local { LOCAL_OPENING } else { TRIPLES_OPENING };
        let class = quoted_after(task, opening).unwrap_or_default();
        let schema = self.schema_for(class)?;
        if local && !repairing && fnv(class).is_multiple_of(3) {
            return Ok(format!("Here is the schema:\n```shex\n<{}> {{\n  wdt:P31 [\n```", class));
        }
        let schema = if local {
            let mut i = 0;
            schema.retain_start_constraints(|tc| {
                i += 1;
                is_typing(tc) || i % 3 != 0
            })
        } else {
            schema.clone()
        };
        let text = serialize_shexc(&schema).map_err(|e| LlmError::Provider(e.to_string()))?;
        Ok(format!("```shex\n{text}```"))
    }
}

impl LlmClient for SyntheticResponder {
    fn complete(&self, messages: &[Message], _format: ResponseFormat) -> Result<String, LlmError> {
        let last = messages.len().saturating_sub(1);
        let task = messages.iter().enumerate().rev().find(|(_, m)| {
            m.role == Role::User
                && (m.content.ends_with(CARDINALITY_INSTRUCTION)
                    || m.content.ends_with(NODE_INSTRUCTION)
                    || m.content.starts_with(LOCAL_OPENING)
                    || m.content.starts_with(TRIPLES_OPENING))
        });
        if let Some((i, m)) = task {
            let t = m.content.as_str();
            let retry = i != last;
            if t.ends_with(CARDINALITY_INSTRUCTION) {
                return self.cardinality(t, retry);
            }
            if t.ends_with(NODE_INSTRUCTION) {
                return self.node(t);
            }
            return self.full_schema(t, t.starts_with(LOCAL_OPENING), retry);
        }
        Err(LlmError::Provider("unrecognized request".into()))
    }

    fn model_id(&self) -> String {
        RESPONDER_MODEL.to_owned()
    }
}
