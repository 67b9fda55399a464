//! Local, triples and global prompts.

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use shexgen_core::{vocab, Iri, PrefixMap};
use shexgen_kg::{ClassRef, Completeness, GlobalPredicateRecord, KgKind, Term, Triple};
use thiserror::Error;

pub const SYSTEM_PROMPT: &str = "You are a skilled knowledge engineer with deep expertise in writing ShEx (Shape Expressions) schemas. Carefully analyze the provided few-shot examples to understand the end-to-end generation process. Generate precise, well-structured ShEx scripts based on given example items and their related triples.";

pub const CARDINALITY_INSTRUCTION: &str = "Task: decide whether this predicate belongs in the shape of the class and, if so, its occurrence bounds per instance. Reply with one JSON object only: {\"include\": true or false, \"min\": <integer>, \"max\": <integer or \"*\">}.";

pub const NODE_INSTRUCTION: &str = "Task: give the node constraint for the objects of this predicate. Reply with one JSON object only, holding exactly one of the keys \"datatype\" (a datatype IRI), \"referenced_classes\" (a list of class IRIs), \"value_list\" (a list of allowed values) or \"node_kind\" (\"IRI\"). An empty object means any IRI.";

/// Distribution buckets shown before the rest is folded into `other`.
const MAX_BUCKETS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PromptSetting {
    Local,
    Triples,
    Global,
}

impl PromptSetting {
    pub const ALL: [PromptSetting; 3] = [PromptSetting::Local, PromptSetting::Triples, PromptSetting::Global];

    /// Whether the setting asks for a full ShEx script rather than structured parts.
    pub fn is_end_to_end(self) -> bool {
        self != PromptSetting::Global
    }
}

impl fmt::Display for PromptSetting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PromptSetting::Local => "local",
            PromptSetting::Triples => "triples",
            PromptSetting::Global => "global",
        })
    }
}

impl FromStr for PromptSetting {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "local" => Ok(PromptSetting::Local),
            "triples" => Ok(PromptSetting::Triples),
            "global" => Ok(PromptSetting::Global),
            other => Err(format!("unknown setting {other:?} (expected local, triples or global)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    pub role: Role,
    pub content: String,
}

impl Message {
    pub fn system(content: impl Into<String>) -> Self {
        Message { role: Role::System, content: content.into() }
    }

    pub fn user(content: impl Into<String>) -> Self {
        Message { role: Role::User, content: content.into() }
    }

    pub fn assistant(content: impl Into<String>) -> Self {
        Message { role: Role::Assistant, content: content.into() }
    }
}

/// Stable digest of a conversation, used to key recorded replies.
pub fn messages_hash(messages: &[Message]) -> String {
    let json = serde_json::to_string(messages).expect("messages serialize");
    hex::encode(Sha256::digest(json.as_bytes()))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Exemplar {
    pub user: String,
    pub assistant: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatPrompt {
    pub setting: PromptSetting,
    pub system: String,
    pub fewshot: Vec<Exemplar>,
    pub user: String,
}

impl ChatPrompt {
    pub fn new(setting: PromptSetting, fewshot: &[Exemplar], user: impl Into<String>) -> Self {
        ChatPrompt { setting, system: SYSTEM_PROMPT.to_owned(), fewshot: fewshot.to_vec(), user: user.into() }
    }

    pub fn messages(&self) -> Vec<Message> {
        let mut out = vec![Message::system(&self.system)];
        for ex in &self.fewshot {
            out.push(Message::user(&ex.user));
            out.push(Message::assistant(&ex.assistant));
        }
        out.push(Message::user(&self.user));
        out
    }

    pub fn hash(&self) -> String {
        messages_hash(&self.messages())
    }

    /// The same conversation with `suffix` appended to the final request.
    pub fn with_instruction(&self, suffix: &str) -> ChatPrompt {
        let mut p = self.clone();
        p.user = format!("{}\n{suffix}", self.user);
        p
    }

    pub fn len(&self) -> usize {
        self.system.len() + self.user.len() + self.fewshot.iter().map(|e| e.user.len() + e.assistant.len()).sum::<usize>()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Few-shot pairs for each request kind of one KG.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Exemplars {
    pub local: Vec<Exemplar>,
    pub triples: Vec<Exemplar>,
    pub global_cardinality: Vec<Exemplar>,
    pub global_node: Vec<Exemplar>,
}

impl Exemplars {
    pub const FILES: [&'static str; 4] = ["local", "triples", "global_cardinality", "global_node"];

    /// Reads `<dir>/<kg>/<kind>.json`, each a JSON list of exemplars; absent
    /// files yield no exemplars.
    pub fn load(dir: &Path, kind: KgKind) -> Result<Exemplars, PromptError> {
        let base = dir.join(kind.to_string());
        let read = |name: &str| -> Result<Vec<Exemplar>, PromptError> {
            let path = base.join(format!("{name}.json"));
            match fs::read_to_string(&path) {
                Ok(text) => serde_json::from_str(&text).map_err(|e| PromptError::Exemplars(format!("{}: {e}", path.display()))),
                Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(Vec::new()),
                Err(e) => Err(PromptError::Exemplars(format!("{}: {e}", path.display()))),
            }
        };
        Ok(Exemplars {
            local: read("local")?,
            triples: read("triples")?,
            global_cardinality: read("global_cardinality")?,
            global_node: read("global_node")?,
        })
    }

    pub fn get(&self, name: &str) -> &[Exemplar] {
        match name {
            "local" => &self.local,
            "triples" => &self.triples,
            "global_cardinality" => &self.global_cardinality,
            "global_node" => &self.global_node,
            _ => &[],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PromptError {
    #[error("no sample instances to show")]
    EmptySample,
    #[error("no predicates to show")]
    EmptyPredicateSet,
    #[error("record is missing required fields: {}", .0.join(", "))]
    IncompleteRecord(Vec<&'static str>),
    #[error("cannot load exemplars: {0}")]
    Exemplars(String),
}

/// One sampled instance with its outgoing triples.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceSample {
    pub instance: Iri,
    pub label: Option<String>,
    pub triples: Vec<Triple>,
}

/// Class identity as shown to the model: `'<iri> (label)'`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassInfo {
    pub iri: Iri,
    pub label: Option<String>,
}

impl ClassInfo {
    fn quoted(&self) -> String {
        match &self.label {
            Some(l) => format!("'{} ({l})'", self.iri),
            None => format!("'{}'", self.iri),
        }
    }
}

fn prefixes() -> PrefixMap {
    PrefixMap::well_known()
}

fn short(iri: &str, pm: &PrefixMap) -> String {
    pm.compact(iri).unwrap_or_else(|| format!("<{iri}>"))
}

fn with_label(text: String, label: Option<&str>) -> String {
    match label {
        Some(l) => format!("{text} ({l})"),
        None => text,
    }
}

fn object_text(t: &Term, pm: &PrefixMap) -> String {
    match t {
        Term::Iri { value } => short(value.as_str(), pm),
        other => other.lexical().to_owned(),
    }
}

fn datatype_text(t: &Term, pm: &PrefixMap) -> String {
    match t {
        Term::Iri { .. } => "IRI".to_owned(),
        Term::Bnode { .. } => "bnode".to_owned(),
        Term::Literal { datatype: Some(d), .. } => short(d.as_str(), pm),
        Term::Literal { language: Some(_), .. } => short(vocab::RDF_LANG_STRING, pm),
        Term::Literal { .. } => short(vocab::XSD_STRING, pm),
    }
}

/// `subject (label) predicate (label) [object (label) (datatype: X), ...]`,
/// one line per run of triples sharing subject and predicate.
fn grouped_lines(triples: &[&Triple], pm: &PrefixMap, with_datatype: bool) -> Vec<String> {
    let mut lines = Vec::new();
    let mut i = 0;
    while i < triples.len() {
        let head = triples[i];
        let mut objects = Vec::new();
        while i < triples.len() && triples[i].subject == head.subject && triples[i].predicate == head.predicate {
            let t = triples[i];
            if !t.object.is_blank() {
                let mut o = with_label(object_text(&t.object, pm), t.labels.object.as_deref());
                if with_datatype {
                    o = format!("{o} (datatype: {})", datatype_text(&t.object, pm));
                }
                objects.push(o);
            }
            i += 1;
        }
        if objects.is_empty() {
            continue;
        }
        lines.push(format!(
            "{} {} [{}]",
            with_label(short(head.subject.as_str(), pm), head.labels.subject.as_deref()),
            with_label(short(head.predicate.as_str(), pm), head.labels.predicate.as_deref()),
            objects.join(", ")
        ));
    }
    lines
}

fn list_block(lines: &[String]) -> String {
    let mut out = String::from("[\n");
    for (i, l) in lines.iter().enumerate() {
        out.push_str("  ");
        out.push_str(l);
        if i + 1 < lines.len() {
            out.push(',');
        }
        out.push('\n');
    }
    out.push(']');
    out
}

pub fn build_local_prompt(class: &ClassInfo, samples: &[InstanceSample], fewshot: &[Exemplar]) -> Result<ChatPrompt, PromptError> {
    if samples.is_empty() {
        return Err(PromptError::EmptySample);
    }
    let pm = prefixes();
    let mut lines = Vec::new();
    for s in samples {
        let mut triples: Vec<&Triple> = s.triples.iter().collect();
        // Typing statements first, then by predicate; the sort is stable.
        triples.sort_by_key(|t| (!vocab::is_typing_predicate(t.predicate.as_str()), t.predicate.as_str()));
        lines.extend(grouped_lines(&triples, &pm, true));
    }
    let user = format!(
        "Based on the information, generate the ShEx schema for the class {}. The provided list contains example instances of this class with the following fields: 'subject' (label), 'predicate' (label), 'object' (label), and 'datatype'.\nExample instances:\n{}",
        class.quoted(),
        list_block(&lines)
    );
    Ok(ChatPrompt::new(PromptSetting::Local, fewshot, user))
}

/// `examples` lists predicates in the order they should appear, each with
/// its example triples.
pub fn build_triples_prompt(class: &ClassInfo, examples: &[(Iri, Vec<Triple>)], fewshot: &[Exemplar]) -> Result<ChatPrompt, PromptError> {
    if examples.iter().all(|(_, t)| t.is_empty()) {
        return Err(PromptError::EmptyPredicateSet);
    }
    let pm = prefixes();
    let mut lines = Vec::new();
    for (_, triples) in examples {
        let refs: Vec<&Triple> = triples.iter().collect();
        lines.extend(grouped_lines(&refs, &pm, true));
    }
    let user = format!(
        "Generate a ShEx schema for the class {} based on the provided information. The provided list contains example triples of instances of this class, with the following fields: 'subject' (label), 'predicate' (label), 'object' (label), and 'datatype'. Each predicate used by instances of this class is represented with triples from {} instances.\nExample triples of predicates:\n{}",
        class.quoted(),
        shexgen_kg::queries::EXAMPLE_INSTANCES,
        list_block(&lines)
    );
    Ok(ChatPrompt::new(PromptSetting::Triples, fewshot, user))
}

fn quote(s: &str) -> String {
    format!("'{}'", s.replace('\\', "\\\\").replace('\'', "\\'"))
}

fn percent(f: f64) -> String {
    format!("{:.2}%", f * 100.0)
}

/// Largest buckets first, at most [`MAX_BUCKETS`], remainder folded into `other`.
fn top_buckets(entries: Vec<(String, f64)>) -> Vec<(String, f64)> {
    let mut entries = entries;
    entries.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    if entries.len() > MAX_BUCKETS {
        let rest: f64 = entries[MAX_BUCKETS..].iter().map(|e| e.1).sum();
        entries.truncate(MAX_BUCKETS);
        entries.push(("other".to_owned(), rest));
    }
    entries
}

fn render_distribution(entries: &[(String, f64)]) -> String {
    entries.iter().map(|(k, v)| format!("{k}: {}", percent(*v))).collect::<Vec<_>>().join(", ")
}

fn class_list(classes: &[ClassRef], pm: &PrefixMap) -> String {
    let items: Vec<String> = classes.iter().map(|c| with_label(short(c.iri.as_str(), pm), c.label.as_deref())).collect();
    format!("[{}]", items.join(", "))
}

/// The record rendered as a single-quoted key/value block.
pub fn render_record(record: &GlobalPredicateRecord) -> Result<String, PromptError> {
    let mut missing = Vec::new();
    if !record.completeness.contains(Completeness::FREQUENCY) {
        missing.push("frequency");
    }
    if !record.completeness.contains(Completeness::CARDINALITY) {
        missing.push("cardinality_distribution");
    }
    if !missing.is_empty() {
        return Err(PromptError::IncompleteRecord(missing));
    }
    let pm = prefixes();
    let opt = |s: &Option<String>| quote(s.as_deref().unwrap_or(""));
    let mut fields: Vec<(&str, String)> = vec![
        ("class_uri", quote(record.class_uri.as_str())),
        ("class_label", opt(&record.class_label)),
        ("class_description", opt(&record.class_description)),
        ("predicate_uri", quote(record.predicate_uri.as_str())),
        ("predicate_label", opt(&record.predicate_label)),
        ("predicate_description", opt(&record.predicate_description)),
    ];
    let refs: Vec<&Triple> = record.triple_examples.iter().collect();
    let examples: Vec<String> = refs
        .iter()
        .flat_map(|t| grouped_lines(std::slice::from_ref(t), &pm, false))
        .map(|l| format!("    {}", quote(&l)))
        .collect();
    fields.push((
        "triple_examples",
        if examples.is_empty() { "[]".to_owned() } else { format!("[\n{}\n  ]", examples.join(",\n")) },
    ));
    fields.push(("frequency", quote(&percent(record.frequency))));

    let mut card: Vec<(String, f64)> = vec![("0".to_owned(), record.missing_fraction().max(0.0))];
    card.extend(record.cardinality_distribution.iter().map(|(k, v)| (k.to_string(), *v)));
    let mut card = top_buckets(card);
    card.sort_by_key(|(k, _)| k.parse::<u64>().unwrap_or(u64::MAX));
    fields.push(("cardinality_distribution", quote(&render_distribution(&card))));

    let datatypes: Vec<(String, f64)> = record
        .datatype_of_objects
        .iter()
        .map(|(k, v)| (if k.contains("://") { short(k, &pm) } else { k.clone() }, *v))
        .collect();
    let datatypes = top_buckets(datatypes);
    let dt = match datatypes.as_slice() {
        [] => "none".to_owned(),
        [(k, _)] => k.clone(),
        many => render_distribution(many),
    };
    fields.push(("datatype_of_objects", quote(&dt)));

    let classes = top_buckets(record.object_class_distribution.iter().map(|(k, v)| (short(k.as_str(), &pm), *v)).collect());
    let oc = if classes.is_empty() { "none".to_owned() } else { render_distribution(&classes) };
    fields.push(("object_class_distribution", quote(&oc)));

    if let Some(c) = &record.subject_type_constraint {
        fields.push((
            "subject_type_constraint",
            quote(&format!(
                "Based on the subject type constraint of Wikidata, the item described by such predicates should be a subclass or instance of {}.",
                class_list(c, &pm)
            )),
        ));
    }
    if let Some(c) = &record.value_type_constraint {
        fields.push((
            "value_type_constraint",
            quote(&format!(
                "Based on the value type constraint of Wikidata, the value item should be a subclass or instance of {}.",
                class_list(c, &pm)
            )),
        ));
    }
    let body: Vec<String> = fields.into_iter().map(|(k, v)| format!("  '{k}': {v}")).collect();
    Ok(format!("{{\n{}\n}}", body.join(",\n")))
}

pub fn build_global_prompt(record: &GlobalPredicateRecord, fewshot: &[Exemplar]) -> Result<ChatPrompt, PromptError> {
    let user = format!("Based on the following information, generate constraints in JSON:\n{}", render_record(record)?);
    Ok(ChatPrompt::new(PromptSetting::Global, fewshot, user))
}
