use std::fmt;

use serde::{Deserialize, Serialize};
use shexgen_core::Iri;

/// An RDF term as returned by an endpoint.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Term {
    Iri { value: Iri },
    Literal { value: String, datatype: Option<Iri>, language: Option<String> },
    Bnode { value: String },
}

impl Term {
    pub fn iri(iri: Iri) -> Self {
        Term::Iri { value: iri }
    }

    pub fn as_iri(&self) -> Option<&Iri> {
        match self {
            Term::Iri { value } => Some(value),
            _ => None,
        }
    }

    pub fn lexical(&self) -> &str {
        match self {
            Term::Iri { value } => value.as_str(),
            Term::Literal { value, .. } | Term::Bnode { value } => value,
        }
    }

    pub fn is_blank(&self) -> bool {
        matches!(self, Term::Bnode { .. })
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Iri { value } => write!(f, "<{value}>"),
            Term::Literal { value, language: Some(l), .. } => write!(f, "{value:?}@{l}"),
            Term::Literal { value, datatype: Some(d), .. } => write!(f, "{value:?}^^<{d}>"),
            Term::Literal { value, .. } => write!(f, "{value:?}"),
            Term::Bnode { value } => write!(f, "_:{value}"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TripleLabels {
    pub subject: Option<String>,
    pub predicate: Option<String>,
    pub object: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Triple {
    pub subject: Iri,
    pub predicate: Iri,
    pub object: Term,
    #[serde(default)]
    pub labels: TripleLabels,
}
