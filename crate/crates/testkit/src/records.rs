//! Hand-built predicate records.

use std::collections::BTreeMap;

use shexgen_core::Iri;
use shexgen_kg::{ClassRef, Completeness, GlobalPredicateRecord, Term, Triple, TripleLabels};

fn iri(s: &str) -> Iri {
    Iri::new(s).expect("valid IRI")
}

/// A record over `instance_count` instances where `counts[k]` instances carry
/// the predicate exactly `k` times.
pub fn record(
    class: &str,
    predicate: &str,
    instance_count: u64,
    counts: &[(u32, u64)],
    datatypes: &[(&str, f64)],
    object_classes: &[(&str, f64)],
) -> GlobalPredicateRecord {
    let n = instance_count.max(1) as f64;
    let used: u64 = counts.iter().map(|(_, c)| c).sum();
    GlobalPredicateRecord {
        class_uri: iri(class),
        class_label: None,
        class_description: None,
        predicate_uri: iri(predicate),
        predicate_label: None,
        predicate_description: None,
        instance_count,
        triple_examples: Vec::new(),
        frequency: used as f64 / n,
        cardinality_distribution: counts.iter().filter(|(k, _)| *k > 0).map(|(k, c)| (*k, *c as f64 / n)).collect(),
        datatype_of_objects: datatypes.iter().map(|(k, v)| ((*k).to_owned(), *v)).collect(),
        object_class_distribution: object_classes.iter().map(|(k, v)| (iri(k), *v)).collect::<BTreeMap<_, _>>(),
        distinct_object_ratio: Some(0.5),
        subject_type_constraint: None,
        value_type_constraint: None,
        completeness: Completeness::all().difference(Completeness::CONSTRAINTS),
    }
}

fn class_ref(iri_text: &str, label: &str) -> ClassRef {
    ClassRef { iri: iri(iri_text), label: Some(label.to_owned()) }
}

fn example(subject: &str, subject_label: Option<&str>, object: &str, object_label: Option<&str>) -> Triple {
    Triple {
        subject: iri(&format!("http://www.wikidata.org/entity/{subject}")),
        predicate: iri("http://www.wikidata.org/prop/direct/P664"),
        object: Term::iri(iri(&format!("http://www.wikidata.org/entity/{object}"))),
        labels: TripleLabels {
            subject: subject_label.map(str::to_owned),
            predicate: Some("organizer".into()),
            object: object_label.map(str::to_owned),
        },
    }
}

/// The organizer-of-film-award record used as the worked global example.
pub fn organizer_record() -> GlobalPredicateRecord {
    let mut r = record(
        "http://www.wikidata.org/entity/Q4220917",
        "http://www.wikidata.org/prop/direct/P664",
        3000,
        &[(1, 52)],
        &[("IRI", 1.0)],
        &[("http://www.wikidata.org/entity/Q43229", 0.1333), ("http://www.wikidata.org/entity/Q5", 0.0667)],
    );
    r.class_label = Some("film award".into());
    r.class_description = Some("recognition for cinematic achievements".into());
    r.predicate_label = Some("organizer".into());
    r.predicate_description = Some("person or institution organizing an event".into());
    r.triple_examples = vec![
        example("Q3910523", None, "Q2288813", Some("Italian National Syndicate of Film Journalists")),
        example("Q11624249", Some("Fujimoto Prize"), "Q114256803", None),
        example("Q18640780", Some("Florida Film Critics Circle Awards"), "Q3074282", Some("Florida Film Critics Circle")),
    ];
    r.subject_type_constraint = Some(vec![class_ref("http://www.wikidata.org/entity/Q170584", "project")]);
    r.value_type_constraint = Some(vec![
        class_ref("http://www.wikidata.org/entity/Q5", "human"),
        class_ref("http://www.wikidata.org/entity/Q43229", "organization"),
    ]);
    r.completeness = Completeness::all();
    r
}
