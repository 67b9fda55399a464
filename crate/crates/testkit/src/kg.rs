//! An in-memory knowledge graph that answers the client's query templates,
//! exposed as a [`Transport`] so tests exercise the real client end to end.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Duration;

use shexgen_core::{vocab, Iri};
use shexgen_kg::queries::{
    ConstraintKind, EXAMPLE_INSTANCES, EXAMPLE_ROW_LIMIT, INSTANCE_TRIPLE_LIMIT, PQ_CLASS, PS_PROPERTY_CONSTRAINT,
    RDFS_COMMENT, RDFS_LABEL, SCHEMA_DESCRIPTION, WD_PROPERTY_CONSTRAINT, WIKIBASE_DIRECT_CLAIM,
};
use shexgen_kg::{
    normalize_query, Binding, EndpointConfig, HttpResponse, KgError, KgKind, KgQuery, Row, SparqlResults, Term, Transport,
};

fn iri(s: &str) -> Iri {
    Iri::new(s).expect("valid IRI")
}

#[derive(Debug, Clone)]
pub struct SyntheticKg {
    pub cfg: EndpointConfig,
    triples: BTreeSet<(Iri, Iri, Term)>,
}

impl SyntheticKg {
    pub fn new(kind: KgKind) -> Self {
        SyntheticKg::with_config(EndpointConfig::new(kind, format!("http://synthetic.test/{kind}/sparql")))
    }

    pub fn with_config(cfg: EndpointConfig) -> Self {
        SyntheticKg { cfg, triples: BTreeSet::new() }
    }

    pub fn kind(&self) -> KgKind {
        self.cfg.kg_kind
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    pub fn add(&mut self, s: &str, p: &str, o: Term) -> &mut Self {
        self.triples.insert((iri(s), iri(p), o));
        self
    }

    pub fn add_iri(&mut self, s: &str, p: &str, o: &str) -> &mut Self {
        self.add(s, p, Term::iri(iri(o)))
    }

    pub fn add_literal(&mut self, s: &str, p: &str, value: &str, datatype: Option<&str>) -> &mut Self {
        self.add(s, p, Term::Literal { value: value.into(), datatype: datatype.map(iri), language: None })
    }

    pub fn add_instance(&mut self, s: &str, class: &str) -> &mut Self {
        let t = self.cfg.typing_predicate.as_str().to_owned();
        self.add_iri(s, &t, class)
    }

    pub fn add_subclass(&mut self, sub: &str, sup: &str) -> &mut Self {
        let p = self.kind().subclass_predicate();
        self.add_iri(sub, p.as_str(), sup)
    }

    pub fn label(&mut self, e: &str, text: &str) -> &mut Self {
        self.add(e, RDFS_LABEL, Term::Literal { value: text.into(), datatype: None, language: Some("en".into()) })
    }

    pub fn describe(&mut self, e: &str, text: &str) -> &mut Self {
        let p = if self.kind() == KgKind::Wikidata { SCHEMA_DESCRIPTION } else { RDFS_COMMENT };
        self.add(e, p, Term::Literal { value: text.into(), datatype: None, language: Some("en".into()) })
    }

    /// Declares a Wikidata direct property with its entity and label.
    pub fn declare_property(&mut self, direct: &str, label: &str) -> &mut Self {
        let entity = shexgen_kg::property_entity(self.kind(), &iri(direct));
        self.add_iri(entity.as_str(), WIKIBASE_DIRECT_CLAIM, direct);
        self.label(entity.as_str(), label)
    }

    pub fn add_property_constraint(&mut self, direct: &str, kind: ConstraintKind, classes: &[&str]) -> &mut Self {
        let entity = shexgen_kg::property_entity(self.kind(), &iri(direct));
        let statement = format!("http://synthetic.test/statement/{}/{:?}", entity.local_name(), kind);
        self.add_iri(entity.as_str(), WD_PROPERTY_CONSTRAINT, &statement);
        self.add_iri(&statement, PS_PROPERTY_CONSTRAINT, kind.item());
        for c in classes {
            self.add_iri(&statement, PQ_CLASS, c);
        }
        self
    }

    fn objects<'a>(&'a self, s: &'a Iri, p: &'a Iri) -> impl Iterator<Item = &'a Term> + 'a {
        self.triples.iter().filter(move |(ts, tp, _)| ts == s && tp == p).map(|(_, _, o)| o)
    }

    fn outgoing<'a>(&'a self, s: &'a Iri) -> impl Iterator<Item = (&'a Iri, &'a Term)> + 'a {
        self.triples.iter().filter(move |(ts, _, _)| ts == s).map(|(_, p, o)| (p, o))
    }

    pub fn instances(&self, class: &Iri) -> BTreeSet<Iri> {
        let t = &self.cfg.typing_predicate;
        self.triples
            .iter()
            .filter(|(_, p, o)| p == t && o.as_iri() == Some(class))
            .map(|(s, _, _)| s.clone())
            .collect()
    }

    pub fn classes(&self) -> BTreeSet<Iri> {
        let t = &self.cfg.typing_predicate;
        self.triples.iter().filter(|(_, p, _)| p == t).filter_map(|(_, _, o)| o.as_iri().cloned()).collect()
    }

    pub fn predicates(&self) -> BTreeSet<Iri> {
        self.triples.iter().map(|(_, p, _)| p.clone()).collect()
    }

    fn en(&self, s: &Iri, p: &str) -> Option<String> {
        let p = iri(p);
        let found = self.objects(s, &p).find_map(|o| match o {
            Term::Literal { value, language: Some(l), .. } if l == "en" => Some(value.clone()),
            _ => None,
        });
        found
    }

    fn label_of(&self, term: &Term) -> Option<String> {
        term.as_iri().and_then(|i| self.en(i, RDFS_LABEL))
    }

    fn pairs(&self, class: &Iri, predicate: &Iri) -> Vec<(Iri, Term)> {
        let mut out = Vec::new();
        for s in self.instances(class) {
            for o in self.objects(&s, predicate) {
                out.push((s.clone(), o.clone()));
            }
        }
        out
    }

    /// Evaluates one query template directly over the triple set.
    pub fn answer(&self, q: &KgQuery) -> SparqlResults {
        let int = |n: usize| Binding::integer(n as u64);
        match q {
            KgQuery::InstanceCount { class } => {
                SparqlResults::new(&["count"], vec![row([("count", int(self.instances(class).len()))])])
            }
            KgQuery::PredicateFrequencies { class } => {
                let mut counts: BTreeMap<Iri, BTreeSet<Iri>> = BTreeMap::new();
                for s in self.instances(class) {
                    for (p, _) in self.outgoing(&s) {
                        counts.entry(p.clone()).or_default().insert(s.clone());
                    }
                }
                let mut v: Vec<(Iri, usize)> = counts.into_iter().map(|(p, s)| (p, s.len())).collect();
                v.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
                let rows = v.into_iter().map(|(p, n)| row([("predicate", Binding::uri(p.as_str())), ("count", int(n))])).collect();
                SparqlResults::new(&["predicate", "count"], rows)
            }
            KgQuery::ObjectDatatypes { class, predicate } => {
                let mut groups: BTreeMap<(Option<String>, &str), usize> = BTreeMap::new();
                for (_, o) in self.pairs(class, predicate) {
                    let key = match &o {
                        Term::Iri { .. } => (None, "IRI"),
                        Term::Bnode { .. } => (None, "bnode"),
                        Term::Literal { datatype, language, .. } => {
                            let dt = match (datatype, language) {
                                (Some(d), _) => d.as_str().to_owned(),
                                (None, Some(_)) => vocab::RDF_LANG_STRING.to_owned(),
                                (None, None) => vocab::XSD_STRING.to_owned(),
                            };
                            (Some(dt), "literal")
                        }
                    };
                    *groups.entry(key).or_insert(0) += 1;
                }
                let rows = groups
                    .into_iter()
                    .map(|((dt, kind), n)| {
                        let mut r = row([("kind", Binding::literal(kind)), ("count", int(n))]);
                        if let Some(dt) = dt {
                            r.insert("datatype".into(), Binding::uri(dt));
                        }
                        r
                    })
                    .collect();
                SparqlResults::new(&["datatype", "kind", "count"], rows)
            }
            KgQuery::CountMissing { class, predicate } => {
                let n = self.instances(class).iter().filter(|s| self.objects(s, predicate).next().is_none()).count();
                SparqlResults::new(&["count"], vec![row([("count", int(n))])])
            }
            KgQuery::CardinalityDistribution { class, predicate } => {
                let mut hist: BTreeMap<usize, usize> = BTreeMap::new();
                for s in self.instances(class) {
                    let k = self.objects(&s, predicate).count();
                    if k > 0 {
                        *hist.entry(k).or_insert(0) += 1;
                    }
                }
                let mut v: Vec<(usize, usize)> = hist.into_iter().collect();
                v.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
                let rows = v.into_iter().map(|(k, n)| row([("cardinality", int(k)), ("count", int(n))])).collect();
                SparqlResults::new(&["cardinality", "count"], rows)
            }
            KgQuery::ObjectStats { class, predicate } => {
                let pairs = self.pairs(class, predicate);
                let distinct: BTreeSet<&Term> = pairs.iter().map(|(_, o)| o).collect();
                SparqlResults::new(&["total", "distinct"], vec![row([("total", int(pairs.len())), ("distinct", int(distinct.len()))])])
            }
            KgQuery::DistinctIriObjects { class, predicate } => {
                let pairs = self.pairs(class, predicate);
                let n = pairs.iter().filter_map(|(_, o)| o.as_iri()).collect::<BTreeSet<_>>().len();
                SparqlResults::new(&["count"], vec![row([("count", int(n))])])
            }
            KgQuery::ObjectClasses { class, predicate } => {
                let t = &self.cfg.typing_predicate;
                let objects: BTreeSet<Iri> = self.pairs(class, predicate).into_iter().filter_map(|(_, o)| o.as_iri().cloned()).collect();
                let mut hist: BTreeMap<Iri, usize> = BTreeMap::new();
                for o in &objects {
                    for c in self.objects(o, t).filter_map(Term::as_iri) {
                        *hist.entry(c.clone()).or_insert(0) += 1;
                    }
                }
                let mut v: Vec<(Iri, usize)> = hist.into_iter().collect();
                v.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
                let rows = v.into_iter().map(|(c, n)| row([("class", Binding::uri(c.as_str())), ("count", int(n))])).collect();
                SparqlResults::new(&["class", "count"], rows)
            }
            KgQuery::PredicateExamples { class, predicate } => {
                let mut subjects: Vec<Iri> =
                    self.instances(class).into_iter().filter(|s| self.objects(s, predicate).next().is_some()).collect();
                subjects.sort_by_key(id_order);
                subjects.truncate(EXAMPLE_INSTANCES);
                let mut pairs: Vec<(Iri, Term)> =
                    subjects.iter().flat_map(|s| self.objects(s, predicate).map(move |o| (s.clone(), o.clone()))).collect();
                pairs.sort_by(|a, b| id_order(&a.0).cmp(&id_order(&b.0)).then_with(|| a.1.lexical().cmp(b.1.lexical())));
                pairs.truncate(EXAMPLE_ROW_LIMIT);
                let rows = pairs
                    .into_iter()
                    .map(|(s, o)| {
                        let mut r = row([("subject", Binding::uri(s.as_str())), ("object", binding_of(&o))]);
                        opt(&mut r, "subjectLabel", self.en(&s, RDFS_LABEL));
                        opt(&mut r, "objectLabel", self.label_of(&o));
                        r
                    })
                    .collect();
                SparqlResults::new(&["subject", "subjectLabel", "object", "objectLabel"], rows)
            }
            KgQuery::SampleInstances { class, n } => {
                let mut subjects: Vec<Iri> = self.instances(class).into_iter().collect();
                if self.kind() == KgKind::Wikidata {
                    subjects.sort_by_key(id_order);
                    subjects.truncate(*n);
                    let rows = subjects.into_iter().map(|s| row([("subject", Binding::uri(s.as_str()))])).collect();
                    SparqlResults::new(&["subject"], rows)
                } else {
                    let mut counted: Vec<(Iri, usize)> = subjects
                        .drain(..)
                        .map(|s| {
                            let n = self.outgoing(&s).map(|(p, _)| p).collect::<BTreeSet<_>>().len();
                            (s, n)
                        })
                        .collect();
                    counted.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
                    counted.truncate(*n);
                    let rows = counted.into_iter().map(|(s, c)| row([("subject", Binding::uri(s.as_str())), ("count", int(c))])).collect();
                    SparqlResults::new(&["subject", "count"], rows)
                }
            }
            KgQuery::InstanceTriples { subject } => {
                let mut v: Vec<(Iri, Term, Option<String>)> = Vec::new();
                for (p, o) in self.outgoing(subject) {
                    let predicate_label = if self.kind() == KgKind::Wikidata {
                        let claim = iri(WIKIBASE_DIRECT_CLAIM);
                        let Some(property) = self
                            .triples
                            .iter()
                            .find(|(_, tp, to)| *tp == claim && to.as_iri() == Some(p))
                            .map(|(s, _, _)| s.clone())
                        else {
                            continue;
                        };
                        self.en(&property, RDFS_LABEL)
                    } else {
                        self.en(p, RDFS_LABEL)
                    };
                    v.push((p.clone(), o.clone(), predicate_label));
                }
                v.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.lexical().cmp(b.1.lexical())));
                v.truncate(INSTANCE_TRIPLE_LIMIT);
                let rows = v
                    .into_iter()
                    .map(|(p, o, pl)| {
                        let mut r = row([("predicate", Binding::uri(p.as_str())), ("object", binding_of(&o))]);
                        opt(&mut r, "predicateLabel", pl);
                        opt(&mut r, "objectLabel", self.label_of(&o));
                        r
                    })
                    .collect();
                SparqlResults::new(&["predicate", "predicateLabel", "object", "objectLabel"], rows)
            }
            KgQuery::EntityInfo { entity } => {
                let desc = if self.kind() == KgKind::Wikidata { SCHEMA_DESCRIPTION } else { RDFS_COMMENT };
                let mut r = Row::new();
                opt(&mut r, "label", self.en(entity, RDFS_LABEL));
                opt(&mut r, "description", self.en(entity, desc));
                SparqlResults::new(&["label", "description"], vec![r])
            }
            KgQuery::DirectSuperclasses { class } => {
                let sub = self.kind().subclass_predicate();
                let supers: BTreeSet<Iri> = self.objects(class, &sub).filter_map(Term::as_iri).cloned().collect();
                let rows = supers.into_iter().map(|s| row([("super", Binding::uri(s.as_str()))])).collect();
                SparqlResults::new(&["super"], rows)
            }
            KgQuery::PropertyConstraint { property, kind } => {
                let (has, ps, pq) = (iri(WD_PROPERTY_CONSTRAINT), iri(PS_PROPERTY_CONSTRAINT), iri(PQ_CLASS));
                let item = iri(kind.item());
                let mut classes: BTreeSet<Iri> = BTreeSet::new();
                for st in self.objects(property, &has).filter_map(Term::as_iri) {
                    if self.objects(st, &ps).any(|o| o.as_iri() == Some(&item)) {
                        classes.extend(self.objects(st, &pq).filter_map(Term::as_iri).cloned());
                    }
                }
                let mut v: Vec<Iri> = classes.into_iter().collect();
                v.sort_by_key(id_order);
                let rows = v
                    .into_iter()
                    .map(|c| {
                        let mut r = row([("class", Binding::uri(c.as_str()))]);
                        opt(&mut r, "classLabel", self.en(&c, RDFS_LABEL));
                        r
                    })
                    .collect();
                SparqlResults::new(&["class", "classLabel"], rows)
            }
        }
    }

    /// Recovers the template behind `text` by rendering every candidate built
    /// from the IRIs and limit it mentions.
    pub fn identify(&self, text: &str) -> Option<KgQuery> {
        let target = normalize_query(text);
        let iris: Vec<Iri> = mentioned_iris(text).into_iter().filter_map(|s| Iri::new(s).ok()).collect();
        let limit = text.rsplit("LIMIT").next().and_then(|t| t.trim().parse::<usize>().ok());
        let mut candidates = Vec::new();
        for a in &iris {
            candidates.push(KgQuery::InstanceCount { class: a.clone() });
            candidates.push(KgQuery::PredicateFrequencies { class: a.clone() });
            candidates.push(KgQuery::InstanceTriples { subject: a.clone() });
            candidates.push(KgQuery::EntityInfo { entity: a.clone() });
            candidates.push(KgQuery::DirectSuperclasses { class: a.clone() });
            for kind in [ConstraintKind::SubjectType, ConstraintKind::ValueType] {
                candidates.push(KgQuery::PropertyConstraint { property: a.clone(), kind });
            }
            if let Some(n) = limit {
                candidates.push(KgQuery::SampleInstances { class: a.clone(), n });
            }
            for b in &iris {
                let (class, predicate) = (a.clone(), b.clone());
                candidates.extend([
                    KgQuery::ObjectDatatypes { class: class.clone(), predicate: predicate.clone() },
                    KgQuery::CountMissing { class: class.clone(), predicate: predicate.clone() },
                    KgQuery::CardinalityDistribution { class: class.clone(), predicate: predicate.clone() },
                    KgQuery::ObjectStats { class: class.clone(), predicate: predicate.clone() },
                    KgQuery::DistinctIriObjects { class: class.clone(), predicate: predicate.clone() },
                    KgQuery::ObjectClasses { class: class.clone(), predicate: predicate.clone() },
                    KgQuery::PredicateExamples { class, predicate },
                ]);
            }
        }
        candidates.into_iter().find(|q| normalize_query(&q.render(&self.cfg)) == target)
    }
}

fn mentioned_iris(text: &str) -> BTreeSet<&str> {
    let mut out = BTreeSet::new();
    let mut rest = text;
    while let Some(start) = rest.find('<') {
        let tail = &rest[start + 1..];
        match tail.find('>') {
            Some(end) if !tail[..end].contains(char::is_whitespace) && tail[..end].contains(':') => {
                out.insert(&tail[..end]);
                rest = &tail[end + 1..];
            }
            _ => rest = tail,
        }
    }
    out
}

/// Order by identifier length, then lexically: numeric Wikidata ids sort by value.
fn id_order(i: &Iri) -> (usize, String) {
    (i.as_str().len(), i.as_str().to_owned())
}

fn row<const N: usize>(items: [(&str, Binding); N]) -> Row {
    items.into_iter().map(|(k, v)| (k.to_owned(), v)).collect()
}

fn opt(r: &mut Row, var: &str, value: Option<String>) {
    if let Some(v) = value {
        r.insert(var.to_owned(), Binding::lang(v, "en"));
    }
}

fn binding_of(t: &Term) -> Binding {
    match t {
        Term::Iri { value } => Binding::uri(value.as_str()),
        Term::Literal { value, language: Some(l), .. } => Binding::lang(value.clone(), l),
        Term::Literal { value, datatype: Some(d), .. } => Binding::typed(value.clone(), d.as_str()),
        Term::Literal { value, .. } => Binding::literal(value.clone()),
        Term::Bnode { value } => Binding { kind: "bnode".into(), value: value.clone(), datatype: None, lang: None },
    }
}

/// Serves a [`SyntheticKg`] over the transport interface, counting requests.
/// Scripted HTTP statuses are returned, in order, before real answers.
pub struct SyntheticEndpoint {
    kg: Arc<SyntheticKg>,
    requests: AtomicU64,
    failures: Mutex<VecDeque<u16>>,
    delay: Duration,
}

impl SyntheticEndpoint {
    pub fn new(kg: SyntheticKg) -> Self {
        SyntheticEndpoint { kg: Arc::new(kg), requests: AtomicU64::new(0), failures: Mutex::new(VecDeque::new()), delay: Duration::ZERO }
    }

    pub fn with_delay(mut self, delay: Duration) -> Self {
        self.delay = delay;
        self
    }

    pub fn fail_next(&self, statuses: &[u16]) {
        self.failures.lock().unwrap().extend(statuses.iter().copied());
    }

    pub fn requests(&self) -> u64 {
        self.requests.load(Ordering::SeqCst)
    }

    pub fn kg(&self) -> &SyntheticKg {
        &self.kg
    }
}

impl Transport for SyntheticEndpoint {
    fn execute(&self, _endpoint: &str, query: &str, _timeout: Duration) -> Result<HttpResponse, KgError> {
        self.requests.fetch_add(1, Ordering::SeqCst);
        if !self.delay.is_zero() {
            std::thread::sleep(self.delay);
        }
        if let Some(status) = self.failures.lock().unwrap().pop_front() {
            return Ok(HttpResponse { status, body: "scripted failure".into() });
        }
        match self.kg.identify(query) {
            Some(q) => Ok(HttpResponse { status: 200, body: serde_json::to_string(&self.kg.answer(&q)).expect("serializable results") }),
            None => Ok(HttpResponse { status: 400, body: format!("unrecognized query:\n{query}") }),
        }
    }
}

/// A transport that must never be reached.
pub struct CountingTransport {
    requests: AtomicU64,
}

impl CountingTransport {
    pub fn new() -> Self {
        CountingTransport { requests: AtomicU64::new(0) }
    }

    pub fn requests(&self) -> u64 {
        self.requests.load(Ordering::SeqCst)
    }
}

impl Default for CountingTransport {
    fn default() -> Self {
        CountingTransport::new()
    }
}

impl Transport for CountingTransport {
    fn execute(&self, _endpoint: &str, _query: &str, _timeout: Duration) -> Result<HttpResponse, KgError> {
        self.requests.fetch_add(1, Ordering::SeqCst);
        Err(KgError::Transport("counting transport has no backend".into()))
    }
}

/// Dispatches each request to the endpoint registered under its URL.
#[derive(Default)]
pub struct EndpointRouter {
    routes: BTreeMap<String, Arc<dyn Transport>>,
}

impl EndpointRouter {
    pub fn new() -> Self {
        EndpointRouter::default()
    }

    pub fn route(mut self, url: impl Into<String>, transport: Arc<dyn Transport>) -> Self {
        self.routes.insert(url.into(), transport);
        self
    }
}

impl Transport for EndpointRouter {
    fn execute(&self, endpoint: &str, query: &str, timeout: Duration) -> Result<HttpResponse, KgError> {
        match self.routes.get(endpoint) {
            Some(t) => t.execute(endpoint, query, timeout),
            None => Err(KgError::Transport(format!("no route to {endpoint}"))),
        }
    }
}
