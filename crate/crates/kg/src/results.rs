//! SPARQL 1.1 JSON results documents.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use shexgen_core::Iri;

use crate::error::KgError;
use crate::rdf::Term;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Binding {
    #[serde(rename = "type")]
    pub kind: String,
    pub value: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub datatype: Option<String>,
    #[serde(rename = "xml:lang", default, skip_serializing_if = "Option::is_none")]
    pub lang: Option<String>,
}

impl Binding {
    pub fn uri(value: impl Into<String>) -> Self {
        Binding { kind: "uri".into(), value: value.into(), datatype: None, lang: None }
    }

    pub fn literal(value: impl Into<String>) -> Self {
        Binding { kind: "literal".into(), value: value.into(), datatype: None, lang: None }
    }

    pub fn typed(value: impl Into<String>, datatype: &str) -> Self {
        Binding { kind: "literal".into(), value: value.into(), datatype: Some(datatype.into()), lang: None }
    }

    pub fn lang(value: impl Into<String>, lang: &str) -> Self {
        Binding { kind: "literal".into(), value: value.into(), datatype: None, lang: Some(lang.into()) }
    }

    pub fn integer(n: u64) -> Self {
        Binding::typed(n.to_string(), shexgen_core::vocab::XSD_INTEGER)
    }

    pub fn to_term(&self) -> Result<Term, KgError> {
        match self.kind.as_str() {
            "uri" => Ok(Term::iri(Iri::new(self.value.clone()).map_err(|e| KgError::Malformed(e.to_string()))?)),
            "literal" | "typed-literal" => Ok(Term::Literal {
                value: self.value.clone(),
                datatype: self.datatype.as_deref().map(Iri::new).transpose().map_err(|e| KgError::Malformed(e.to_string()))?,
                language: self.lang.clone(),
            }),
            "bnode" => Ok(Term::Bnode { value: self.value.clone() }),
            other => Err(KgError::Malformed(format!("unknown binding type {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Head {
    pub vars: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bindings {
    pub bindings: Vec<BTreeMap<String, Binding>>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SparqlResults {
    pub head: Head,
    pub results: Bindings,
}

pub type Row = BTreeMap<String, Binding>;

impl SparqlResults {
    pub fn new(vars: &[&str], rows: Vec<Row>) -> Self {
        SparqlResults {
            head: Head { vars: vars.iter().map(|v| (*v).to_owned()).collect() },
            results: Bindings { bindings: rows },
        }
    }

    pub fn parse(body: &str) -> Result<Self, KgError> {
        serde_json::from_str(body).map_err(|e| KgError::Malformed(e.to_string()))
    }

    pub fn rows(&self) -> &[Row] {
        &self.results.bindings
    }

    pub fn len(&self) -> usize {
        self.results.bindings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.results.bindings.is_empty()
    }
}

pub fn opt_str<'a>(row: &'a Row, var: &str) -> Option<&'a str> {
    row.get(var).map(|b| b.value.as_str())
}

pub fn get_iri(row: &Row, var: &str) -> Result<Iri, KgError> {
    let b = row.get(var).ok_or_else(|| KgError::Malformed(format!("missing variable ?{var}")))?;
    if b.kind != "uri" {
        return Err(KgError::Malformed(format!("?{var} is not an IRI")));
    }
    Iri::new(b.value.clone()).map_err(|e| KgError::Malformed(e.to_string()))
}

pub fn get_u64(row: &Row, var: &str) -> Result<u64, KgError> {
    let b = row.get(var).ok_or_else(|| KgError::Malformed(format!("missing variable ?{var}")))?;
    // Some endpoints render aggregate counts as decimals ("3.0").
    let v = b.value.trim();
    v.parse::<u64>()
        .ok()
        .or_else(|| v.parse::<f64>().ok().filter(|f| *f >= 0.0 && f.fract() == 0.0).map(|f| f as u64))
        .ok_or_else(|| KgError::Malformed(format!("?{var} is not a count: {v:?}")))
}

/// Single count from a one-row aggregate; an empty result counts as zero.
pub fn single_count(results: &SparqlResults, var: &str) -> Result<u64, KgError> {
    match results.rows().first() {
        None => Ok(0),
        Some(row) if !row.contains_key(var) => Ok(0),
        Some(row) => get_u64(row, var),
    }
}
