//! SPARQL templates. Every query the client sends is rendered from a
//! [`KgQuery`], so a recorded cache can be replayed key for key.

use shexgen_core::{vocab, Iri};

use crate::config::{EndpointConfig, KgKind};

pub const WIKIBASE_DIRECT_CLAIM: &str = "http://wikiba.se/ontology#directClaim";
pub const SCHEMA_DESCRIPTION: &str = "http://schema.org/description";
pub const RDFS_LABEL: &str = "http://www.w3.org/2000/01/rdf-schema#label";
pub const RDFS_COMMENT: &str = "http://www.w3.org/2000/01/rdf-schema#comment";
pub const WD_PROPERTY_CONSTRAINT: &str = "http://www.wikidata.org/prop/P2302";
pub const PS_PROPERTY_CONSTRAINT: &str = "http://www.wikidata.org/prop/statement/P2302";
pub const PQ_CLASS: &str = "http://www.wikidata.org/prop/qualifier/P2308";
pub const VALUE_TYPE_CONSTRAINT: &str = "http://www.wikidata.org/entity/Q21510865";
pub const SUBJECT_TYPE_CONSTRAINT: &str = "http://www.wikidata.org/entity/Q21503250";

/// Row cap for per-instance triple listings.
pub const INSTANCE_TRIPLE_LIMIT: usize = 200;
/// Instances contributing examples for one predicate.
pub const EXAMPLE_INSTANCES: usize = 5;
/// Row cap for per-predicate example listings.
pub const EXAMPLE_ROW_LIMIT: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ConstraintKind {
    SubjectType,
    ValueType,
}

impl ConstraintKind {
    pub fn item(self) -> &'static str {
        match self {
            ConstraintKind::SubjectType => SUBJECT_TYPE_CONSTRAINT,
            ConstraintKind::ValueType => VALUE_TYPE_CONSTRAINT,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum KgQuery {
    InstanceCount { class: Iri },
    PredicateFrequencies { class: Iri },
    ObjectDatatypes { class: Iri, predicate: Iri },
    CountMissing { class: Iri, predicate: Iri },
    CardinalityDistribution { class: Iri, predicate: Iri },
    ObjectStats { class: Iri, predicate: Iri },
    DistinctIriObjects { class: Iri, predicate: Iri },
    ObjectClasses { class: Iri, predicate: Iri },
    PredicateExamples { class: Iri, predicate: Iri },
    SampleInstances { class: Iri, n: usize },
    InstanceTriples { subject: Iri },
    EntityInfo { entity: Iri },
    DirectSuperclasses { class: Iri },
    PropertyConstraint { property: Iri, kind: ConstraintKind },
}

fn en_label(var_subject: &str, var_label: &str) -> String {
    format!("OPTIONAL {{ {var_subject} <{RDFS_LABEL}> {var_label} . FILTER(LANG({var_label}) = \"en\") }}")
}

impl KgQuery {
    pub fn render(&self, cfg: &EndpointConfig) -> String {
        let t = cfg.typing_predicate.as_str();
        let wikidata = cfg.kg_kind == KgKind::Wikidata;
        match self {
            KgQuery::InstanceCount { class } => format!(
                "SELECT (COUNT(DISTINCT ?subject) AS ?count)\nWHERE {{\n  ?subject <{t}> <{class}> .\n}}\n"
            ),
            KgQuery::PredicateFrequencies { class } => format!(
                "SELECT DISTINCT ?predicate (COUNT(DISTINCT ?subject) AS ?count)\nWHERE {{\n  ?subject <{t}> <{class}> ;\n           ?predicate ?object .\n}}\nGROUP BY ?predicate\nORDER BY DESC(?count)\n"
            ),
            KgQuery::ObjectDatatypes { class, predicate } => format!(
                "SELECT ?datatype ?kind (COUNT(?object) AS ?count)\nWHERE {{\n  ?subject <{t}> <{class}> ;\n           <{predicate}> ?object .\n  BIND (datatype(?object) AS ?datatype)\n  BIND (IF(isIRI(?object), \"IRI\", IF(isBlank(?object), \"bnode\", \"literal\")) AS ?kind)\n}}\nGROUP BY ?datatype ?kind\n"
            ),
            KgQuery::CountMissing { class, predicate } => format!(
                "SELECT (COUNT(DISTINCT ?subject) AS ?count)\nWHERE {{\n  ?subject <{t}> <{class}> .\n  FILTER NOT EXISTS {{\n    ?subject <{predicate}> ?object\n  }}\n}}\n"
            ),
            KgQuery::CardinalityDistribution { class, predicate } => format!(
                "SELECT ?cardinality (COUNT(DISTINCT ?subject) AS ?count)\n{{\n  SELECT DISTINCT ?subject (COUNT(?object) AS ?cardinality)\n  WHERE {{\n    ?subject <{t}> <{class}> ;\n             <{predicate}> ?object .\n  }}\n  GROUP BY ?subject\n}}\nGROUP BY ?cardinality\nORDER BY DESC(?count)\n"
            ),
            KgQuery::ObjectStats { class, predicate } => format!(
                "SELECT (COUNT(?object) AS ?total) (COUNT(DISTINCT ?object) AS ?distinct)\nWHERE {{\n  ?subject <{t}> <{class}> ;\n           <{predicate}> ?object .\n}}\n"
            ),
            KgQuery::DistinctIriObjects { class, predicate } => format!(
                "SELECT (COUNT(DISTINCT ?object) AS ?count)\nWHERE {{\n  ?subject <{t}> <{class}> ;\n           <{predicate}> ?object .\n  FILTER(isIRI(?object))\n}}\n"
            ),
            KgQuery::ObjectClasses { class, predicate } => format!(
                "SELECT ?class (COUNT(DISTINCT ?object) AS ?count)\nWHERE {{\n  ?subject <{t}> <{class}> ;\n           <{predicate}> ?object .\n  ?object <{t}> ?class .\n}}\nGROUP BY ?class\nORDER BY DESC(?count) ?class\n"
            ),
            KgQuery::PredicateExamples { class, predicate } => format!(
                "SELECT ?subject ?subjectLabel ?object ?objectLabel\nWHERE {{\n  {{\n    SELECT DISTINCT ?subject\n    WHERE {{\n      ?subject <{t}> <{class}> ;\n               <{predicate}> ?object .\n    }}\n    ORDER BY STRLEN(STR(?subject)) STR(?subject)\n    LIMIT {EXAMPLE_INSTANCES}\n  }}\n  ?subject <{predicate}> ?object .\n  {}\n  {}\n}}\nORDER BY STRLEN(STR(?subject)) STR(?subject) STR(?object)\nLIMIT {EXAMPLE_ROW_LIMIT}\n",
                en_label("?subject", "?subjectLabel"),
                en_label("?object", "?objectLabel"),
            ),
            KgQuery::SampleInstances { class, n } => {
                if wikidata {
                    format!(
                        "SELECT DISTINCT ?subject\nWHERE {{\n  ?subject <{t}> <{class}> .\n}}\nORDER BY STRLEN(STR(?subject)) STR(?subject)\nLIMIT {n}\n"
                    )
                } else {
                    format!(
                        "SELECT ?subject (COUNT(DISTINCT ?predicate) AS ?count)\nWHERE {{\n  ?subject <{t}> <{class}> ;\n           ?predicate ?object .\n}}\nGROUP BY ?subject\nORDER BY DESC(?count) ?subject\nLIMIT {n}\n"
                    )
                }
            }
            KgQuery::InstanceTriples { subject } => {
                let predicate_label = if wikidata {
                    format!(
                        "?property <{WIKIBASE_DIRECT_CLAIM}> ?predicate .\n  {}",
                        en_label("?property", "?predicateLabel")
                    )
                } else {
                    en_label("?predicate", "?predicateLabel")
                };
                format!(
                    "SELECT ?predicate ?predicateLabel ?object ?objectLabel\nWHERE {{\n  <{subject}> ?predicate ?object .\n  {predicate_label}\n  {}\n}}\nORDER BY ?predicate STR(?object)\nLIMIT {INSTANCE_TRIPLE_LIMIT}\n",
                    en_label("?object", "?objectLabel"),
                )
            }
            KgQuery::EntityInfo { entity } => {
                let desc = if wikidata { SCHEMA_DESCRIPTION } else { RDFS_COMMENT };
                format!(
                    "SELECT ?label ?description\nWHERE {{\n  OPTIONAL {{ <{entity}> <{RDFS_LABEL}> ?label . FILTER(LANG(?label) = \"en\") }}\n  OPTIONAL {{ <{entity}> <{desc}> ?description . FILTER(LANG(?description) = \"en\") }}\n}}\nLIMIT 1\n"
                )
            }
            KgQuery::DirectSuperclasses { class } => {
                let sub = cfg.kg_kind.subclass_predicate();
                format!("SELECT DISTINCT ?super\nWHERE {{\n  <{class}> <{sub}> ?super .\n  FILTER(isIRI(?super))\n}}\nORDER BY ?super\n")
            }
            KgQuery::PropertyConstraint { property, kind } => format!(
                "SELECT DISTINCT ?class ?classLabel\nWHERE {{\n  <{property}> <{WD_PROPERTY_CONSTRAINT}> ?statement .\n  ?statement <{PS_PROPERTY_CONSTRAINT}> <{}> ;\n             <{PQ_CLASS}> ?class .\n  {}\n}}\nORDER BY STRLEN(STR(?class)) STR(?class)\n",
                kind.item(),
                en_label("?class", "?classLabel"),
            ),
        }
    }
}

/// Predicates worth profiling for a class: truthy direct properties on
/// Wikidata, everything but labels and comments elsewhere.
pub fn is_candidate_predicate(kind: KgKind, predicate: &Iri) -> bool {
    match kind {
        KgKind::Wikidata => predicate.as_str().starts_with(vocab::WDT),
        KgKind::Yago => !matches!(predicate.as_str(), RDFS_LABEL | RDFS_COMMENT | SCHEMA_DESCRIPTION),
    }
}

/// The entity that carries labels and constraints for a direct property.
pub fn property_entity(kind: KgKind, predicate: &Iri) -> Iri {
    match (kind, predicate.as_str().strip_prefix(vocab::WDT)) {
        (KgKind::Wikidata, Some(local)) => Iri::new(format!("{}{local}", vocab::WD)).unwrap_or_else(|_| predicate.clone()),
        _ => predicate.clone(),
    }
}
