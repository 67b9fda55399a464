use std::fmt;
use std::str::FromStr;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use shexgen_core::{vocab, Iri};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KgKind {
    Wikidata,
    Yago,
}

impl KgKind {
    pub fn default_typing_predicate(self) -> Iri {
        Iri::from_static(match self {
            KgKind::Wikidata => vocab::WDT_P31,
            KgKind::Yago => vocab::RDF_TYPE,
        })
    }

    pub fn subclass_predicate(self) -> Iri {
        Iri::from_static(match self {
            KgKind::Wikidata => vocab::WDT_P279,
            KgKind::Yago => vocab::RDFS_SUBCLASS_OF,
        })
    }

    pub fn default_endpoint(self) -> &'static str {
        match self {
            KgKind::Wikidata => "https://query.wikidata.org/sparql",
            KgKind::Yago => "https://yago-knowledge.org/sparql/query",
        }
    }
}

impl fmt::Display for KgKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            KgKind::Wikidata => "wikidata",
            KgKind::Yago => "yago",
        })
    }
}

impl FromStr for KgKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "wikidata" | "wes" => Ok(KgKind::Wikidata),
            "yago" | "yagos" => Ok(KgKind::Yago),
            other => Err(format!("unknown KG kind {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EndpointConfig {
    pub endpoint_url: String,
    pub kg_kind: KgKind,
    pub typing_predicate: Iri,
    #[serde(with = "secs")]
    pub request_timeout: Duration,
    pub max_in_flight: usize,
    /// Delay before each retry, in milliseconds; its length bounds retries.
    pub retry_backoff_ms: Vec<u64>,
    pub subclass_depth: usize,
}

impl EndpointConfig {
    pub fn new(kg_kind: KgKind, endpoint_url: impl Into<String>) -> Self {
        EndpointConfig {
            endpoint_url: endpoint_url.into(),
            kg_kind,
            typing_predicate: kg_kind.default_typing_predicate(),
            request_timeout: Duration::from_secs(60),
            max_in_flight: 4,
            retry_backoff_ms: vec![500, 2000, 8000],
            subclass_depth: 10,
        }
    }

    pub fn wikidata() -> Self {
        EndpointConfig::new(KgKind::Wikidata, KgKind::Wikidata.default_endpoint())
    }

    pub fn yago() -> Self {
        EndpointConfig::new(KgKind::Yago, KgKind::Yago.default_endpoint())
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.max_in_flight == 0 {
            return Err("max_in_flight must be at least 1".into());
        }
        if self.endpoint_url.trim().is_empty() {
            return Err("endpoint_url is empty".into());
        }
        Ok(())
    }
}

mod secs {
    use std::time::Duration;

    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u64(d.as_secs())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        u64::deserialize(d).map(Duration::from_secs)
    }
}
