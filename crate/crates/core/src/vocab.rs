//! Namespace and term constants.

pub const RDF: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";
pub const RDFS: &str = "http://www.w3.org/2000/01/rdf-schema#";
pub const XSD: &str = "http://www.w3.org/2001/XMLSchema#";
pub const WD: &str = "http://www.wikidata.org/entity/";
pub const WDT: &str = "http://www.wikidata.org/prop/direct/";
pub const SCHEMA: &str = "http://schema.org/";
pub const YAGO: &str = "http://yago-knowledge.org/resource/";

pub const RDF_TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";
pub const RDF_LANG_STRING: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#langString";
pub const RDFS_SUBCLASS_OF: &str = "http://www.w3.org/2000/01/rdf-schema#subClassOf";
pub const WDT_P31: &str = "http://www.wikidata.org/prop/direct/P31";
pub const WDT_P279: &str = "http://www.wikidata.org/prop/direct/P279";

pub const XSD_STRING: &str = "http://www.w3.org/2001/XMLSchema#string";
pub const XSD_INTEGER: &str = "http://www.w3.org/2001/XMLSchema#integer";
pub const XSD_DECIMAL: &str = "http://www.w3.org/2001/XMLSchema#decimal";
pub const XSD_DOUBLE: &str = "http://www.w3.org/2001/XMLSchema#double";
pub const XSD_BOOLEAN: &str = "http://www.w3.org/2001/XMLSchema#boolean";
pub const XSD_DATETIME: &str = "http://www.w3.org/2001/XMLSchema#dateTime";
pub const XSD_DATE: &str = "http://www.w3.org/2001/XMLSchema#date";
pub const XSD_GYEAR: &str = "http://www.w3.org/2001/XMLSchema#gYear";
pub const XSD_ANY_URI: &str = "http://www.w3.org/2001/XMLSchema#anyURI";

/// Predicates that assert class membership of a focus node.
pub const TYPING_PREDICATES: [&str; 2] = [WDT_P31, RDF_TYPE];

pub fn is_typing_predicate(iri: &str) -> bool {
    TYPING_PREDICATES.contains(&iri)
}

pub const WELL_KNOWN_PREFIXES: [(&str, &str); 9] = [
    ("rdf", RDF),
    ("rdfs", RDFS),
    ("xsd", XSD),
    ("wd", WD),
    ("wdt", WDT),
    ("schema", SCHEMA),
    ("yago", YAGO),
    ("owl", "http://www.w3.org/2002/07/owl#"),
    ("geo", "http://www.opengis.net/ont/geosparql#"),
];
