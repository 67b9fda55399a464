use std::collections::{BTreeMap, HashMap};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Condvar, Mutex};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use shexgen_core::{vocab, Iri};

use crate::cache::{cache_key, QueryCache};
use crate::config::EndpointConfig;
use crate::error::KgError;
use crate::queries::{is_candidate_predicate, property_entity, ConstraintKind, KgQuery};
use crate::rdf::{Term, Triple, TripleLabels};
use crate::results::{get_iri, get_u64, opt_str, single_count, SparqlResults};
use crate::transport::Transport;

struct Semaphore {
    free: Mutex<usize>,
    cv: Condvar,
}

impl Semaphore {
    fn new(n: usize) -> Self {
        Semaphore { free: Mutex::new(n.max(1)), cv: Condvar::new() }
    }

    fn acquire(&self) -> Permit<'_> {
        let mut free = self.free.lock().expect("semaphore poisoned");
        while *free == 0 {
            free = self.cv.wait(free).expect("semaphore poisoned");
        }
        *free -= 1;
        Permit(self)
    }
}

struct Permit<'a>(&'a Semaphore);

impl Drop for Permit<'_> {
    fn drop(&mut self) {
        *self.0.free.lock().expect("semaphore poisoned") += 1;
        self.0.cv.notify_one();
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClientStats {
    pub network_requests: u64,
    pub cache_hits: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredicateFrequency {
    pub predicate: Iri,
    pub count: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObjectKind {
    Iri,
    Literal,
    Bnode,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatatypeCount {
    pub kind: ObjectKind,
    pub datatype: Option<Iri>,
    pub count: u64,
}

impl DatatypeCount {
    /// `IRI`, `bnode`, or the literal's datatype IRI.
    pub fn key(&self) -> String {
        match self.kind {
            ObjectKind::Iri => "IRI".into(),
            ObjectKind::Bnode => "bnode".into(),
            ObjectKind::Literal => self.datatype.as_ref().map_or(vocab::XSD_STRING, Iri::as_str).to_owned(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObjectStats {
    pub total: u64,
    pub distinct: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntityInfo {
    pub label: Option<String>,
    pub description: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassRef {
    pub iri: Iri,
    pub label: Option<String>,
}

/// Cached, rate-limited access to one SPARQL endpoint.
pub struct KgClient {
    cfg: EndpointConfig,
    transport: Arc<dyn Transport>,
    cache: Option<QueryCache>,
    offline: bool,
    gate: Semaphore,
    memo: Mutex<HashMap<String, SparqlResults>>,
    flights: Mutex<HashMap<String, Arc<Mutex<()>>>>,
    network_requests: AtomicU64,
    cache_hits: AtomicU64,
}

impl KgClient {
    pub fn new(cfg: EndpointConfig, transport: Arc<dyn Transport>, cache: Option<QueryCache>, offline: bool) -> Result<Self, KgError> {
        cfg.validate().map_err(KgError::Config)?;
        let gate = Semaphore::new(cfg.max_in_flight);
        Ok(KgClient {
            cfg,
            transport,
            cache,
            offline,
            gate,
            memo: Mutex::new(HashMap::new()),
            flights: Mutex::new(HashMap::new()),
            network_requests: AtomicU64::new(0),
            cache_hits: AtomicU64::new(0),
        })
    }

    pub fn config(&self) -> &EndpointConfig {
        &self.cfg
    }

    pub fn is_offline(&self) -> bool {
        self.offline
    }

    pub fn stats(&self) -> ClientStats {
        ClientStats {
            network_requests: self.network_requests.load(Ordering::Relaxed),
            cache_hits: self.cache_hits.load(Ordering::Relaxed),
        }
    }

    pub fn key_of(&self, query: &KgQuery) -> String {
        cache_key(&self.cfg.endpoint_url, &query.render(&self.cfg))
    }

    pub fn run(&self, query: &KgQuery) -> Result<SparqlResults, KgError> {
        self.run_text(&query.render(&self.cfg))
    }

    /// Executes raw query text through the memo, the disk cache and the
    /// network, in that order. Concurrent callers with the same key share
    /// one fetch.
    pub fn run_text(&self, text: &str) -> Result<SparqlResults, KgError> {
        let key = cache_key(&self.cfg.endpoint_url, text);
        if let Some(r) = self.memo.lock().expect("memo poisoned").get(&key) {
            self.cache_hits.fetch_add(1, Ordering::Relaxed);
            return Ok(r.clone());
        }
        let flight = self.flights.lock().expect("flight map poisoned").entry(key.clone()).or_default().clone();
        let _guard = flight.lock().expect("flight lock poisoned");
        if let Some(r) = self.memo.lock().expect("memo poisoned").get(&key) {
            self.cache_hits.fetch_add(1, Ordering::Relaxed);
            return Ok(r.clone());
        }
        if let Some(cache) = &self.cache {
            if let Some(entry) = cache.get(&key)? {
                self.cache_hits.fetch_add(1, Ordering::Relaxed);
                self.memo.lock().expect("memo poisoned").insert(key, entry.results.clone());
                return Ok(entry.results);
            }
        }
        if self.offline {
            return Err(KgError::CacheMiss { key });
        }
        let results = self.fetch(text)?;
        if let Some(cache) = &self.cache {
            cache.put(&key, &self.cfg.endpoint_url, text, &results)?;
        }
        self.memo.lock().expect("memo poisoned").insert(key, results.clone());
        Ok(results)
    }

    fn fetch(&self, text: &str) -> Result<SparqlResults, KgError> {
        let mut attempt = 0;
        loop {
            let outcome = {
                let _permit = self.gate.acquire();
                self.network_requests.fetch_add(1, Ordering::Relaxed);
                self.transport.execute(&self.cfg.endpoint_url, text, self.cfg.request_timeout)
            };
            let err = match outcome {
                Ok(resp) if (200..300).contains(&resp.status) => return SparqlResults::parse(&resp.body),
                Ok(resp) => KgError::Http { status: resp.status, message: truncate(&resp.body, 200) },
                Err(e) => e,
            };
            match self.cfg.retry_backoff_ms.get(attempt) {
                Some(&ms) if err.is_retryable() => {
                    log::warn!("query failed ({err}); retrying in {ms} ms");
                    std::thread::sleep(Duration::from_millis(ms));
                    attempt += 1;
                }
                _ => return Err(err),
            }
        }
    }

    pub fn instance_count(&self, class: &Iri) -> Result<u64, KgError> {
        single_count(&self.run(&KgQuery::InstanceCount { class: class.clone() })?, "count")
    }

    /// All predicates used by instances of `class`, most frequent first.
    pub fn predicate_frequencies(&self, class: &Iri) -> Result<Vec<PredicateFrequency>, KgError> {
        let r = self.run(&KgQuery::PredicateFrequencies { class: class.clone() })?;
        let mut out = r
            .rows()
            .iter()
            .map(|row| Ok(PredicateFrequency { predicate: get_iri(row, "predicate")?, count: get_u64(row, "count")? }))
            .collect::<Result<Vec<_>, KgError>>()?;
        out.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.predicate.cmp(&b.predicate)));
        Ok(out)
    }

    /// Profiling candidates: non-typing predicates of the KG's own vocabulary.
    pub fn candidate_predicates(&self, class: &Iri) -> Result<Vec<PredicateFrequency>, KgError> {
        Ok(self
            .predicate_frequencies(class)?
            .into_iter()
            .filter(|p| p.predicate != self.cfg.typing_predicate && is_candidate_predicate(self.cfg.kg_kind, &p.predicate))
            .collect())
    }

    pub fn count_missing(&self, class: &Iri, predicate: &Iri) -> Result<u64, KgError> {
        single_count(&self.run(&KgQuery::CountMissing { class: class.clone(), predicate: predicate.clone() })?, "count")
    }

    /// Number of instances per observed occurrence count (keys >= 1).
    pub fn cardinality_distribution(&self, class: &Iri, predicate: &Iri) -> Result<BTreeMap<u32, u64>, KgError> {
        let r = self.run(&KgQuery::CardinalityDistribution { class: class.clone(), predicate: predicate.clone() })?;
        let mut out = BTreeMap::new();
        for row in r.rows() {
            let k = get_u64(row, "cardinality")?;
            let k = u32::try_from(k).map_err(|_| KgError::Malformed(format!("cardinality {k} out of range")))?;
            *out.entry(k).or_insert(0) += get_u64(row, "count")?;
        }
        Ok(out)
    }

    pub fn object_datatypes(&self, class: &Iri, predicate: &Iri) -> Result<Vec<DatatypeCount>, KgError> {
        let r = self.run(&KgQuery::ObjectDatatypes { class: class.clone(), predicate: predicate.clone() })?;
        let mut out = Vec::new();
        for row in r.rows() {
            let kind = match opt_str(row, "kind") {
                Some("IRI") => ObjectKind::Iri,
                Some("bnode") => ObjectKind::Bnode,
                Some("literal") => ObjectKind::Literal,
                other => return Err(KgError::Malformed(format!("unexpected object kind {other:?}"))),
            };
            let datatype = match opt_str(row, "datatype") {
                Some(_) => Some(get_iri(row, "datatype")?),
                None => None,
            };
            out.push(DatatypeCount { kind, datatype, count: get_u64(row, "count")? });
        }
        out.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.key().cmp(&b.key())));
        Ok(out)
    }

    pub fn object_stats(&self, class: &Iri, predicate: &Iri) -> Result<ObjectStats, KgError> {
        let r = self.run(&KgQuery::ObjectStats { class: class.clone(), predicate: predicate.clone() })?;
        match r.rows() {
            [] => Ok(ObjectStats { total: 0, distinct: 0 }),
            [row] => Ok(ObjectStats { total: get_u64(row, "total")?, distinct: get_u64(row, "distinct")? }),
            rows => Err(KgError::Malformed(format!("expected one stats row, got {}", rows.len()))),
        }
    }

    pub fn distinct_iri_objects(&self, class: &Iri, predicate: &Iri) -> Result<u64, KgError> {
        single_count(&self.run(&KgQuery::DistinctIriObjects { class: class.clone(), predicate: predicate.clone() })?, "count")
    }

    pub fn object_classes(&self, class: &Iri, predicate: &Iri) -> Result<Vec<(Iri, u64)>, KgError> {
        let r = self.run(&KgQuery::ObjectClasses { class: class.clone(), predicate: predicate.clone() })?;
        let mut out = r
            .rows()
            .iter()
            .map(|row| Ok((get_iri(row, "class")?, get_u64(row, "count")?)))
            .collect::<Result<Vec<_>, KgError>>()?;
        out.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        Ok(out)
    }

    /// Triples for `predicate` from up to five instances of `class`.
    pub fn predicate_examples(&self, class: &Iri, predicate: &Iri) -> Result<Vec<Triple>, KgError> {
        let r = self.run(&KgQuery::PredicateExamples { class: class.clone(), predicate: predicate.clone() })?;
        let predicate_label = self.entity_info(&property_entity(self.cfg.kg_kind, predicate)).ok().and_then(|i| i.label);
        r.rows()
            .iter()
            .filter(|row| row.get("object").is_some_and(|b| b.kind != "bnode"))
            .map(|row| {
                Ok(Triple {
                    subject: get_iri(row, "subject")?,
                    predicate: predicate.clone(),
                    object: term_of(row, "object")?,
                    labels: TripleLabels {
                        subject: opt_str(row, "subjectLabel").map(str::to_owned),
                        predicate: predicate_label.clone(),
                        object: opt_str(row, "objectLabel").map(str::to_owned),
                    },
                })
            })
            .collect()
    }

    /// Datatype fractions over all objects and class fractions over distinct
    /// IRI objects.
    pub fn object_profiles(&self, class: &Iri, predicate: &Iri) -> Result<(BTreeMap<String, f64>, BTreeMap<Iri, f64>), KgError> {
        let counts = self.object_datatypes(class, predicate)?;
        let total: u64 = counts.iter().map(|c| c.count).sum();
        let mut datatypes = BTreeMap::new();
        for c in &counts {
            *datatypes.entry(c.key()).or_insert(0.0) += ratio(c.count, total);
        }
        let denominator = self.distinct_iri_objects(class, predicate)?;
        let classes = self
            .object_classes(class, predicate)?
            .into_iter()
            .map(|(c, n)| (c, ratio(n, denominator).min(1.0)))
            .collect();
        Ok((datatypes, classes))
    }

    pub fn sample_instances(&self, class: &Iri, n: usize) -> Result<Vec<Iri>, KgError> {
        let r = self.run(&KgQuery::SampleInstances { class: class.clone(), n })?;
        r.rows().iter().map(|row| get_iri(row, "subject")).collect()
    }

    /// Outgoing triples of one instance, with English labels where known.
    pub fn instance_triples(&self, subject: &Iri) -> Result<Vec<Triple>, KgError> {
        let r = self.run(&KgQuery::InstanceTriples { subject: subject.clone() })?;
        let subject_label = self.entity_info(subject)?.label;
        let mut out: Vec<Triple> = Vec::with_capacity(r.len());
        for row in r.rows() {
            let t = Triple {
                subject: subject.clone(),
                predicate: get_iri(row, "predicate")?,
                object: term_of(row, "object")?,
                labels: TripleLabels {
                    subject: subject_label.clone(),
                    predicate: opt_str(row, "predicateLabel").map(str::to_owned),
                    object: opt_str(row, "objectLabel").map(str::to_owned),
                },
            };
            // Several labels for one object would repeat the triple.
            if out.last().is_some_and(|p| p.predicate == t.predicate && p.object == t.object) {
                continue;
            }
            out.push(t);
        }
        Ok(out)
    }

    pub fn entity_info(&self, entity: &Iri) -> Result<EntityInfo, KgError> {
        let r = self.run(&KgQuery::EntityInfo { entity: entity.clone() })?;
        Ok(r.rows()
            .first()
            .map(|row| EntityInfo {
                label: opt_str(row, "label").map(str::to_owned),
                description: opt_str(row, "description").map(str::to_owned),
            })
            .unwrap_or_default())
    }

    pub fn predicate_info(&self, predicate: &Iri) -> Result<EntityInfo, KgError> {
        self.entity_info(&property_entity(self.cfg.kg_kind, predicate))
    }

    pub fn direct_superclasses(&self, class: &Iri) -> Result<Vec<Iri>, KgError> {
        let r = self.run(&KgQuery::DirectSuperclasses { class: class.clone() })?;
        r.rows().iter().map(|row| get_iri(row, "super")).collect()
    }

    /// Classes named by a Wikidata subject- or value-type constraint on
    /// `predicate`; empty when the property has none.
    pub fn property_constraint(&self, predicate: &Iri, kind: ConstraintKind) -> Result<Vec<ClassRef>, KgError> {
        let property = property_entity(self.cfg.kg_kind, predicate);
        let r = self.run(&KgQuery::PropertyConstraint { property, kind })?;
        let mut out: Vec<ClassRef> = Vec::new();
        for row in r.rows() {
            let iri = get_iri(row, "class")?;
            if out.iter().any(|c| c.iri == iri) {
                continue;
            }
            out.push(ClassRef { iri, label: opt_str(row, "classLabel").map(str::to_owned) });
        }
        Ok(out)
    }
}

fn term_of(row: &crate::results::Row, var: &str) -> Result<Term, KgError> {
    row.get(var).ok_or_else(|| KgError::Malformed(format!("missing variable ?{var}")))?.to_term()
}

pub(crate) fn ratio(n: u64, d: u64) -> f64 {
    if d == 0 {
        0.0
    } else {
        n as f64 / d as f64
    }
}

fn truncate(s: &str, n: usize) -> String {
    match s.char_indices().nth(n) {
        Some((i, _)) => format!("{}...", &s[..i]),
        None => s.to_owned(),
    }
}
