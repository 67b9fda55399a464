//! Synthetic knowledge graphs whose instances conform to a ground-truth
//! schema, plus a few rare noise predicates.

use std::collections::BTreeSet;

use rand::Rng;
use shexgen_core::{vocab, Cardinality, Iri, Max, NodeConstraint, Schema, ValueSetItem};
use shexgen_kg::queries::{ConstraintKind, RDFS_LABEL};
use shexgen_kg::{KgKind, Term};

use crate::kg::SyntheticKg;
use crate::seeded;

const LABELS: &[(&str, &str)] = &[
    ("P17", "country"),
    ("P21", "sex or gender"),
    ("P27", "country of citizenship"),
    ("P31", "instance of"),
    ("P106", "occupation"),
    ("P135", "movement"),
    ("P170", "creator"),
    ("P186", "made from material"),
    ("P195", "collection"),
    ("P238", "IATA airport code"),
    ("P239", "ICAO airport code"),
    ("P276", "location"),
    ("P373", "Commons category"),
    ("P569", "date of birth"),
    ("P571", "inception"),
    ("P625", "coordinate location"),
    ("P664", "organizer"),
    ("P735", "given name"),
    ("P856", "official website"),
    ("P910", "topic's main category"),
    ("P931", "place served by transport hub"),
    ("P1027", "conferred by"),
    ("P1174", "visitors per year"),
    ("P2044", "elevation above sea level"),
    ("P2048", "height"),
    ("Q5", "human"),
    ("Q515", "city"),
    ("Q6256", "country"),
    ("Q33506", "museum"),
    ("Q43229", "organization"),
    ("Q207694", "art museum"),
    ("Q1097630", "intersex"),
    ("Q1248784", "airport"),
    ("Q3305213", "painting"),
    ("Q4220917", "film award"),
    ("Q6581072", "female"),
    ("Q6581097", "male"),
];

fn known_label(iri: &Iri) -> Option<&'static str> {
    let local = iri.local_name();
    if !iri.as_str().starts_with(vocab::WD) && !iri.as_str().starts_with(vocab::WDT) {
        return None;
    }
    LABELS.iter().find(|(k, _)| *k == local).map(|(_, v)| *v)
}

/// Readable label from a local name: `containedInPlace` → `contained in place`.
fn humanize(local: &str) -> String {
    let mut out = String::new();
    for (i, c) in local.chars().enumerate() {
        if c == '_' {
            out.push(' ');
        } else if c.is_uppercase() && i > 0 {
            out.push(' ');
            out.extend(c.to_lowercase());
        } else {
            out.extend(c.to_lowercase());
        }
    }
    out
}

pub fn label_for(iri: &Iri) -> String {
    known_label(iri).map_or_else(|| humanize(iri.local_name()), str::to_owned)
}

fn fnv(s: &str) -> u64 {
    s.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3))
}

pub fn kind_of(schema: &Schema) -> KgKind {
    if schema.focus_class().as_str().starts_with(vocab::WD) {
        KgKind::Wikidata
    } else {
        KgKind::Yago
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WorldParams {
    pub instances: usize,
    /// Instances carrying each noise predicate.
    pub noise_instances: usize,
    pub seed: u64,
}

impl Default for WorldParams {
    fn default() -> Self {
        WorldParams { instances: 40, noise_instances: 2, seed: 7 }
    }
}

fn entity(kind: KgKind, tag: &str, k: u64) -> String {
    match kind {
        KgKind::Wikidata => format!("{}Q{}", vocab::WD, 90_000_000 + (fnv(tag) % 90_000) * 100 + k),
        KgKind::Yago => format!("{}{}_{k}", vocab::YAGO, tag.rsplit(['/', '#']).next().unwrap_or(tag)),
    }
}

fn lexical(datatype: &str, predicate: &Iri, n: u64) -> String {
    let d = datatype.rsplit('#').next().unwrap_or(datatype);
    match d {
        "dateTime" => format!("{}-{:02}-{:02}T00:00:00Z", 1850 + n % 170, 1 + n % 12, 1 + n % 28),
        "date" => format!("{}-{:02}-{:02}", 1850 + n % 170, 1 + n % 12, 1 + n % 28),
        "gYear" => format!("{}", 1850 + n % 170),
        "decimal" | "double" => format!("{}.{}", 10 + n * 37 % 9000, n % 10),
        "integer" => format!("{}", 100 + n * 13),
        "boolean" => n.is_multiple_of(2).to_string(),
        "wktLiteral" => format!("Point({}.{} {}.{})", n % 180, n % 10, n % 90, (n + 3) % 10),
        _ => format!("{} {n}", label_for(predicate)),
    }
}

fn draw_count<R: Rng>(rng: &mut R, c: Cardinality) -> u32 {
    let lo = c.min().max(1);
    let hi = match c.max() {
        Max::Bounded(m) => m,
        Max::Unbounded => lo + 2,
    };
    if c.min() == 0 && rng.gen_bool(0.3) {
        return 0;
    }
    if lo >= hi || rng.gen_bool(0.5) {
        lo
    } else {
        rng.gen_range(lo..=hi)
    }
}

struct Builder<'a> {
    kg: &'a mut SyntheticKg,
    kind: KgKind,
    labeled: BTreeSet<String>,
}

impl Builder<'_> {
    fn label_once(&mut self, e: &str, text: &str) {
        if self.labeled.insert(e.to_owned()) {
            self.kg.label(e, text);
        }
    }

    fn property(&mut self, p: &Iri) {
        if self.kind == KgKind::Wikidata && self.labeled.insert(p.as_str().to_owned()) {
            self.kg.declare_property(p.as_str(), &label_for(p));
        }
    }

    fn typed_pool(&mut self, classes: &[Iri], size: u64) -> Vec<String> {
        let tag = classes.iter().map(Iri::as_str).collect::<Vec<_>>().join("|");
        let tag = if self.kind == KgKind::Yago { classes[0].as_str().to_owned() } else { tag };
        (0..size)
            .map(|k| {
                let e = entity(self.kind, &tag, k);
                let class = &classes[k as usize % classes.len()];
                self.kg.add_instance(&e, class.as_str());
                self.label_once(class.as_str(), &label_for(class));
                self.label_once(&e, &format!("{} {}", label_for(class), k + 1));
                e
            })
            .collect()
    }

    fn untyped_pool(&mut self, predicate: &Iri, size: u64) -> Vec<String> {
        let tag = format!("{}_value", predicate.as_str());
        (0..size)
            .map(|k| {
                if predicate.local_name() == "P856" || predicate.local_name() == "url" {
                    format!("https://www.site{}.example/", fnv(predicate.as_str()) % 1000 + k)
                } else {
                    let e = entity(self.kind, &tag, k);
                    self.label_once(&e, &format!("{} {}", label_for(predicate), k + 1));
                    e
                }
            })
            .collect()
    }
}

/// A graph for the start shape's class of `gt`. Every instance satisfies the
/// start shape; each noise predicate appears on `noise_instances` instances.
pub fn synthesize_world(kg: &mut SyntheticKg, gt: &Schema, params: &WorldParams) {
    let kind = kg.kind();
    let class = gt.focus_class().clone();
    let class_label = label_for(&class);
    let typing = kg.cfg.typing_predicate.clone();
    let mut rng = seeded(params.seed ^ fnv(class.as_str()));
    let mut b = Builder { kg, kind, labeled: BTreeSet::new() };
    b.label_once(class.as_str(), &class_label);
    b.kg.describe(class.as_str(), &format!("class of {class_label} entities"));
    b.property(&typing);

    let instances: Vec<String> = (0..params.instances as u64).map(|i| entity(kind, class.as_str(), i)).collect();
    for (i, s) in instances.iter().enumerate() {
        b.kg.add_instance(s, class.as_str());
        b.label_once(s, &format!("{class_label} {}", i + 1));
    }

    let start = gt.start_shape();
    let mut counter = 0u64;
    for tc in &start.constraints {
        let p = &tc.predicate;
        if vocab::TYPING_PREDICATES.contains(&p.as_str()) || *p == typing || p.as_str() == RDFS_LABEL {
            continue;
        }
        b.property(p);
        if kind == KgKind::Wikidata {
            b.kg.add_property_constraint(p.as_str(), ConstraintKind::SubjectType, &[class.as_str()]);
        }
        let pool: Vec<Term> = match &tc.node {
            NodeConstraint::ShapeRef(label) => {
                let classes: Vec<Iri> = gt.shape(label).map(|s| s.typing_classes_ordered()).unwrap_or_default();
                if classes.is_empty() {
                    b.untyped_pool(p, 8).into_iter().map(|e| Term::iri(Iri::new(e).expect("entity IRI"))).collect()
                } else {
                    if kind == KgKind::Wikidata {
                        let refs: Vec<&str> = classes.iter().map(Iri::as_str).collect();
                        b.kg.add_property_constraint(p.as_str(), ConstraintKind::ValueType, &refs);
                    }
                    b.typed_pool(&classes, 6).into_iter().map(|e| Term::iri(Iri::new(e).expect("entity IRI"))).collect()
                }
            }
            NodeConstraint::ValueSet(items) => items
                .iter()
                .map(|item| match item {
                    ValueSetItem::Iri(i) => {
                        b.label_once(i.as_str(), &label_for(i));
                        Term::iri(i.clone())
                    }
                    ValueSetItem::Literal(l) => {
                        Term::Literal { value: l.lexical.clone(), datatype: l.datatype.clone(), language: l.language.clone() }
                    }
                })
                .collect(),
            NodeConstraint::NodeKindIri => {
                b.untyped_pool(p, 8).into_iter().map(|e| Term::iri(Iri::new(e).expect("entity IRI"))).collect()
            }
            NodeConstraint::Datatype(_) => Vec::new(),
        };
        for s in &instances {
            let n = draw_count(&mut rng, tc.cardinality) as usize;
            let mut chosen = BTreeSet::new();
            for _ in 0..n {
                counter += 1;
                let term = match &tc.node {
                    NodeConstraint::Datatype(d) => literal(d, p, counter),
                    _ => {
                        // Distinct objects per subject where the pool allows it.
                        let mut pick = rng.gen_range(0..pool.len());
                        for _ in 0..pool.len() {
                            if !chosen.contains(&pick) {
                                break;
                            }
                            pick = (pick + 1) % pool.len();
                        }
                        chosen.insert(pick);
                        pool[pick].clone()
                    }
                };
                b.kg.add(s, p.as_str(), term);
            }
        }
    }

    for (k, (p, object)) in noise_predicates(kind).into_iter().enumerate() {
        let p = Iri::new(p).expect("noise predicate");
        b.property(&p);
        for j in 0..params.noise_instances {
            let s = &instances[(k * 7 + j * 13) % instances.len()];
            counter += 1;
            let term = match object {
                Some(dt) => literal(&Iri::new(dt).expect("datatype"), &p, counter),
                None => Term::iri(Iri::new(entity(kind, p.as_str(), counter)).expect("entity IRI")),
            };
            b.kg.add(s, p.as_str(), term);
        }
    }
}

fn literal(datatype: &Iri, predicate: &Iri, n: u64) -> Term {
    let value = lexical(datatype.as_str(), predicate, n);
    match datatype.as_str() {
        vocab::XSD_STRING => Term::Literal { value, datatype: None, language: None },
        vocab::RDF_LANG_STRING => Term::Literal { value, datatype: None, language: Some("en".into()) },
        _ => Term::Literal { value, datatype: Some(datatype.clone()), language: None },
    }
}

/// Rare predicates with `Some(datatype)` for literal objects, `None` for IRIs.
pub fn noise_predicates(kind: KgKind) -> Vec<(&'static str, Option<&'static str>)> {
    match kind {
        KgKind::Wikidata => vec![
            ("http://www.wikidata.org/prop/direct/P373", Some(vocab::XSD_STRING)),
            ("http://www.wikidata.org/prop/direct/P910", None),
        ],
        KgKind::Yago => vec![("http://schema.org/sameAs", None), ("http://schema.org/alternateName", Some(vocab::RDF_LANG_STRING))],
    }
}

/// One graph per KG kind holding a world for every schema of that kind.
pub fn synthesize_worlds(schemas: &[Schema], params: &WorldParams) -> Vec<SyntheticKg> {
    [KgKind::Wikidata, KgKind::Yago]
        .into_iter()
        .map(|kind| {
            let mut kg = SyntheticKg::new(kind);
            for s in schemas.iter().filter(|s| kind_of(s) == kind) {
                synthesize_world(&mut kg, s, params);
            }
            kg
        })
        .collect()
}
