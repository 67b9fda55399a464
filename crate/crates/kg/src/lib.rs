//! Knowledge-graph access: SPARQL templates, a cached client and
//! per-predicate statistics.

pub mod cache;
pub mod client;
pub mod config;
pub mod error;
pub mod oracle;
pub mod queries;
pub mod rdf;
pub mod records;
pub mod results;
pub mod transport;

pub use cache::{cache_key, normalize_query, CacheEntry, QueryCache};
pub use client::{ClassRef, ClientStats, DatatypeCount, EntityInfo, KgClient, ObjectKind, ObjectStats, PredicateFrequency};
pub use config::{EndpointConfig, KgKind};
pub use error::KgError;
pub use oracle::KgSubclassOracle;
pub use queries::{is_candidate_predicate, property_entity, ConstraintKind, KgQuery};
pub use rdf::{Term, Triple, TripleLabels};
pub use records::{build_global_record, Completeness, GlobalPredicateRecord};
pub use results::{Binding, Row, SparqlResults};
pub use transport::{HttpResponse, HttpTransport, Transport};
