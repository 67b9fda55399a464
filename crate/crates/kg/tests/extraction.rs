use std::collections::BTreeMap;
use std::sync::Arc;

use proptest::prelude::*;
use shexgen_core::{vocab, Iri, SubclassOracle};
use shexgen_kg::{
    build_global_record, Completeness, ConstraintKind, KgClient, KgKind, KgQuery, KgSubclassOracle, Term,
};
use shexgen_testkit::{SyntheticEndpoint, SyntheticKg};

const WD: &str = "http://www.wikidata.org/entity/";
const WDT: &str = "http://www.wikidata.org/prop/direct/";
const Y: &str = "http://yago-knowledge.org/resource/";

fn wd(id: &str) -> String {
    format!("{WD}{id}")
}

fn wdt(id: &str) -> String {
    format!("{WDT}{id}")
}

fn iri(s: &str) -> Iri {
    Iri::new(s).unwrap()
}

fn client(kg: SyntheticKg) -> (KgClient, Arc<SyntheticEndpoint>) {
    let cfg = kg.cfg.clone();
    let endpoint = Arc::new(SyntheticEndpoint::new(kg));
    (KgClient::new(cfg, endpoint.clone(), None, false).unwrap(), endpoint)
}

/// 100 books with illustrator counts {1:80, 2:15, 3:5} and 20 with none.
fn books() -> SyntheticKg {
    let mut kg = SyntheticKg::new(KgKind::Yago);
    let book = format!("{Y}Book");
    let ill = "http://schema.org/illustrator";
    for i in 0..120 {
        let b = format!("{Y}book_{i}");
        kg.add_instance(&b, &book);
        let k = match i {
            0..=79 => 1,
            80..=94 => 2,
            95..=99 => 3,
            _ => 0,
        };
        for j in 0..k {
            kg.add_iri(&b, ill, &format!("{Y}person_{i}_{j}"));
        }
    }
    kg
}

#[test]
fn mixed_cardinality_distribution() {
    let (c, _) = client(books());
    let (book, ill) = (iri(&format!("{Y}Book")), iri("http://schema.org/illustrator"));
    let dist = c.cardinality_distribution(&book, &ill).unwrap();
    assert_eq!(dist, BTreeMap::from([(1, 80), (2, 15), (3, 5)]));
    assert_eq!(c.count_missing(&book, &ill).unwrap(), 20);
    assert_eq!(c.instance_count(&book).unwrap(), 120);
    let unknown = iri("http://schema.org/nothing");
    assert_eq!(c.count_missing(&book, &unknown).unwrap(), 120);
    assert!(c.cardinality_distribution(&book, &unknown).unwrap().is_empty());
}

#[test]
fn degenerate_distribution_and_zero_instances() {
    let mut kg = SyntheticKg::new(KgKind::Yago);
    for i in 0..7 {
        kg.add_instance(&format!("{Y}b{i}"), &format!("{Y}Book"));
        kg.add_iri(&format!("{Y}b{i}"), "http://schema.org/illustrator", &format!("{Y}p{i}"));
    }
    let (c, _) = client(kg);
    let book = iri(&format!("{Y}Book"));
    let ill = iri("http://schema.org/illustrator");
    assert_eq!(c.cardinality_distribution(&book, &ill).unwrap(), BTreeMap::from([(1, 7)]));
    assert_eq!(c.count_missing(&book, &ill).unwrap(), 0);
    assert!(c.predicate_frequencies(&iri(&format!("{Y}Nothing"))).unwrap().is_empty());
}

#[test]
fn predicate_frequencies_descend() {
    let (c, _) = client(books());
    let f = c.predicate_frequencies(&iri(&format!("{Y}Book"))).unwrap();
    assert_eq!(f[0].predicate.as_str(), vocab::RDF_TYPE);
    assert_eq!(f[0].count, 120);
    assert_eq!(f[1].count, 100);
    assert!(f.windows(2).all(|w| w[0].count >= w[1].count));
    let candidates = c.candidate_predicates(&iri(&format!("{Y}Book"))).unwrap();
    assert_eq!(candidates.len(), 1);
}

#[test]
fn object_profiles() {
    let mut kg = SyntheticKg::new(KgKind::Wikidata);
    let (award, org, date, blank) = (wd("Q4220917"), wdt("P664"), wdt("P585"), wdt("P9999"));
    for i in 0..10 {
        let s = wd(&format!("Q{}", 100 + i));
        kg.add_instance(&s, &award);
        let o = wd(&format!("Q{}", 500 + i));
        kg.add_iri(&s, &org, &o);
        kg.add_instance(&o, &wd(if i < 8 { "Q43229" } else { "Q5" }));
        kg.add_literal(&s, &date, &format!("20{i:02}-01-01T00:00:00Z"), Some(vocab::XSD_DATETIME));
        kg.add(&s, &blank, Term::Bnode { value: format!("b{i}") });
    }
    let (c, _) = client(kg);
    let (dt, classes) = c.object_profiles(&iri(&award), &iri(&org)).unwrap();
    assert_eq!(dt, BTreeMap::from([("IRI".to_owned(), 1.0)]));
    assert_eq!(classes, BTreeMap::from([(iri(&wd("Q43229")), 0.8), (iri(&wd("Q5")), 0.2)]));
    let (dt, classes) = c.object_profiles(&iri(&award), &iri(&date)).unwrap();
    assert_eq!(dt, BTreeMap::from([(vocab::XSD_DATETIME.to_owned(), 1.0)]));
    assert!(classes.is_empty());
    let (dt, _) = c.object_profiles(&iri(&award), &iri(&blank)).unwrap();
    assert_eq!(dt, BTreeMap::from([("bnode".to_owned(), 1.0)]));
    assert!(c.predicate_examples(&iri(&award), &iri(&blank)).unwrap().is_empty());
}

#[test]
fn wikidata_sampling_orders_by_id() {
    let mut kg = SyntheticKg::new(KgKind::Wikidata);
    for q in ["Q105447", "Q154590", "Q1", "Q20", "Q3"] {
        kg.add_instance(&wd(q), &wd("Q618779"));
    }
    let (c, _) = client(kg);
    let sample = c.sample_instances(&iri(&wd("Q618779")), 3).unwrap();
    let ids: Vec<&str> = sample.iter().map(|i| i.local_name()).collect();
    assert_eq!(ids, ["Q1", "Q3", "Q20"]);
    assert_eq!(c.sample_instances(&iri(&wd("Q618779")), 50).unwrap().len(), 5);
}

#[test]
fn yago_sampling_orders_by_predicate_count() {
    let mut kg = SyntheticKg::new(KgKind::Yago);
    let class = format!("{Y}City");
    kg.add_instance(&format!("{Y}e2"), &class);
    kg.add_instance(&format!("{Y}e1"), &class);
    for p in 0..3 {
        kg.add_literal(&format!("{Y}e2"), &format!("{Y}p{p}"), "x", None);
    }
    for p in 0..12 {
        kg.add_literal(&format!("{Y}e1"), &format!("{Y}p{p}"), "x", None);
    }
    let (c, _) = client(kg);
    let sample = c.sample_instances(&iri(&class), 10).unwrap();
    assert_eq!(sample, [iri(&format!("{Y}e1")), iri(&format!("{Y}e2"))]);
}

#[test]
fn instance_triples_carry_labels() {
    let mut kg = SyntheticKg::new(KgKind::Wikidata);
    let s = wd("Q105447");
    kg.add_instance(&s, &wd("Q4220917"));
    kg.label(&s, "Saturn Award").label(&wd("Q4220917"), "film award");
    kg.declare_property(&wdt("P31"), "instance of");
    kg.add_literal(&s, "http://schema.org/version", "3", None);
    let (c, _) = client(kg);
    let triples = c.instance_triples(&iri(&s)).unwrap();
    assert_eq!(triples.len(), 1, "non-direct predicates are skipped on Wikidata");
    let t = &triples[0];
    assert_eq!(t.labels.subject.as_deref(), Some("Saturn Award"));
    assert_eq!(t.labels.predicate.as_deref(), Some("instance of"));
    assert_eq!(t.labels.object.as_deref(), Some("film award"));
}

#[test]
fn subclass_oracle() {
    let mut kg = SyntheticKg::new(KgKind::Wikidata);
    kg.add_subclass(&wd("QA"), &wd("QB")).add_subclass(&wd("QB"), &wd("QC"));
    kg.add_subclass(&wd("QX"), &wd("QY"));
    let (c, endpoint) = client(kg);
    let oracle = KgSubclassOracle::new(Arc::new(c));
    let (a, b, cc, x) = (iri(&wd("QA")), iri(&wd("QB")), iri(&wd("QC")), iri(&wd("QX")));
    assert!(oracle.is_subclass_of(&a, &a).unwrap());
    assert!(oracle.is_subclass_of(&a, &cc).unwrap());
    assert!(oracle.is_subclass_of(&b, &cc).unwrap());
    assert!(!oracle.is_subclass_of(&cc, &a).unwrap());
    assert!(!oracle.is_subclass_of(&x, &a).unwrap());
    let before = endpoint.requests();
    assert!(oracle.is_subclass_of(&a, &cc).unwrap());
    assert_eq!(endpoint.requests(), before);
}

#[test]
fn subclass_depth_is_bounded() {
    let mut kg = SyntheticKg::new(KgKind::Yago);
    for i in 0..5 {
        kg.add_subclass(&format!("{Y}C{i}"), &format!("{Y}C{}", i + 1));
    }
    let mut cfg = kg.cfg.clone();
    cfg.subclass_depth = 3;
    let endpoint = Arc::new(SyntheticEndpoint::new(kg));
    let oracle = KgSubclassOracle::new(Arc::new(KgClient::new(cfg, endpoint, None, false).unwrap()));
    assert!(oracle.is_subclass_of(&iri(&format!("{Y}C0")), &iri(&format!("{Y}C3"))).unwrap());
    assert!(!oracle.is_subclass_of(&iri(&format!("{Y}C0")), &iri(&format!("{Y}C4"))).unwrap());
}

fn organizer_world() -> SyntheticKg {
    let mut kg = SyntheticKg::new(KgKind::Wikidata);
    let (award, org) = (wd("Q4220917"), wdt("P664"));
    kg.label(&award, "film award").describe(&award, "award for films");
    kg.declare_property(&org, "organizer");
    kg.add_property_constraint(&org, ConstraintKind::SubjectType, &[&wd("Q288514"), &wd("Q170584")]);
    kg.add_property_constraint(&org, ConstraintKind::ValueType, &[&wd("Q43229"), &wd("Q5")]);
    kg.label(&wd("Q43229"), "organization");
    for i in 0..20 {
        let s = wd(&format!("Q{}", 3000 + i));
        kg.add_instance(&s, &award);
        kg.label(&s, &format!("award {i}"));
        if i % 4 != 0 {
            let o = wd(&format!("Q{}", 9000 + i % 6));
            kg.add_iri(&s, &org, &o);
            kg.add_instance(&o, &wd("Q43229"));
        }
    }
    kg
}

#[test]
fn global_record_mirrors_listing_fields() {
    let (c, _) = client(organizer_world());
    let r = build_global_record(&c, &iri(&wd("Q4220917")), &iri(&wdt("P664"))).unwrap();
    assert_eq!(r.class_label.as_deref(), Some("film award"));
    assert_eq!(r.class_description.as_deref(), Some("award for films"));
    assert_eq!(r.predicate_label.as_deref(), Some("organizer"));
    assert_eq!(r.instance_count, 20);
    assert_eq!(r.frequency, 0.75);
    assert_eq!(r.cardinality_distribution, BTreeMap::from([(1, 0.75)]));
    assert_eq!(r.triple_examples.len(), 5);
    assert_eq!(r.datatype_of_objects, BTreeMap::from([("IRI".to_owned(), 1.0)]));
    assert_eq!(r.object_class_distribution, BTreeMap::from([(iri(&wd("Q43229")), 1.0)]));
    let subject: Vec<&str> = r.subject_type_constraint.as_ref().unwrap().iter().map(|c| c.iri.local_name()).collect();
    assert_eq!(subject, ["Q170584", "Q288514"]);
    let value = r.value_type_constraint.as_ref().unwrap();
    assert_eq!(value[0].iri.local_name(), "Q5");
    assert_eq!(value[1].label.as_deref(), Some("organization"));
    assert!(r.completeness.contains(Completeness::all()));
    assert!((r.missing_fraction() - 0.25).abs() < 1e-12);
}

#[test]
fn yago_record_has_no_constraint_lists() {
    let (c, _) = client(books());
    let r = build_global_record(&c, &iri(&format!("{Y}Book")), &iri("http://schema.org/illustrator")).unwrap();
    assert!(r.subject_type_constraint.is_none() && r.value_type_constraint.is_none());
    assert!(!r.completeness.contains(Completeness::CONSTRAINTS));
    assert!(r.is_usable());
    let total: f64 = r.cardinality_distribution.values().sum();
    assert!((total + r.missing_fraction() - 1.0).abs() < 1e-12);
}

#[test]
fn every_template_is_served() {
    let kg = organizer_world();
    let (a, p) = (iri(&wd("Q4220917")), iri(&wdt("P664")));
    let queries = [
        KgQuery::InstanceCount { class: a.clone() },
        KgQuery::PredicateFrequencies { class: a.clone() },
        KgQuery::ObjectDatatypes { class: a.clone(), predicate: p.clone() },
        KgQuery::CountMissing { class: a.clone(), predicate: p.clone() },
        KgQuery::CardinalityDistribution { class: a.clone(), predicate: p.clone() },
        KgQuery::ObjectStats { class: a.clone(), predicate: p.clone() },
        KgQuery::DistinctIriObjects { class: a.clone(), predicate: p.clone() },
        KgQuery::ObjectClasses { class: a.clone(), predicate: p.clone() },
        KgQuery::PredicateExamples { class: a.clone(), predicate: p.clone() },
        KgQuery::SampleInstances { class: a.clone(), n: 7 },
        KgQuery::InstanceTriples { subject: a.clone() },
        KgQuery::EntityInfo { entity: a.clone() },
        KgQuery::DirectSuperclasses { class: a.clone() },
        KgQuery::PropertyConstraint { property: p.clone(), kind: ConstraintKind::ValueType },
    ];
    for q in queries {
        assert_eq!(kg.identify(&q.render(&kg.cfg)), Some(q.clone()), "{q:?}");
    }
}

fn arb_world() -> impl Strategy<Value = (SyntheticKg, usize)> {
    (1usize..4, 1usize..4, proptest::collection::vec((0usize..25, 0usize..3, 0usize..4, 0usize..3), 0..60)).prop_map(
        |(classes, preds, facts)| {
            let mut kg = SyntheticKg::new(KgKind::Yago);
            for (s, c, k, p) in facts {
                let subj = format!("{Y}s{s}");
                kg.add_instance(&subj, &format!("{Y}C{}", c % classes));
                for j in 0..k {
                    kg.add_iri(&subj, &format!("{Y}p{}", p % preds), &format!("{Y}o{s}_{j}"));
                }
            }
            (kg, preds)
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]
    #[test]
    fn missing_plus_distribution_is_instance_count((kg, preds) in arb_world()) {
        let classes: Vec<Iri> = kg.classes().into_iter().collect();
        let (c, _) = client(kg);
        for class in &classes {
            let n = c.instance_count(class).unwrap();
            for p in 0..preds {
                let p = iri(&format!("{Y}p{p}"));
                let missing = c.count_missing(class, &p).unwrap();
                let dist = c.cardinality_distribution(class, &p).unwrap();
                prop_assert!(dist.keys().all(|k| *k >= 1));
                prop_assert_eq!(missing + dist.values().sum::<u64>(), n);
                let r = build_global_record(&c, class, &p).unwrap();
                prop_assert!((0.0..=1.0).contains(&r.frequency));
                prop_assert!(r.cardinality_distribution.values().all(|f| (0.0..=1.0).contains(f)));
                prop_assert!(r.datatype_of_objects.values().all(|f| (0.0..=1.0).contains(f)));
                prop_assert!(r.object_class_distribution.values().all(|f| (0.0..=1.0).contains(f)));
                prop_assert!(r.triple_examples.len() <= 5);
            }
        }
    }
}
