use shexgen_core::{parse_shexc, serialize_shexc, vocab, Cardinality, Iri, Max, NodeConstraint, PrefixMap};
use shexgen_pipeline::ml::{train, ModelKind, TrainParams};
use shexgen_pipeline::prompt::{Message, CARDINALITY_INSTRUCTION};
use shexgen_pipeline::{
    assemble_schema, generate_end_to_end, generate_global, predict_cardinality_structured, predict_node_constraint_structured,
    AssemblyError, CardinalitySource, ChatPrompt, Exemplars, FnClient, GenerationError, GlobalOptions, Part, PromptSetting,
    ScriptedClient, StructuredCardinality, StructuredNodeConstraint,
};
use shexgen_testkit::{fixture_texts, organizer_record, record, separable_dataset};

const MUSEUM: &str = "museum";

fn iri(s: &str) -> Iri {
    Iri::new(s).unwrap()
}

fn museum_text() -> String {
    fixture_texts().into_iter().find(|(n, _)| n == MUSEUM).unwrap().1
}

fn e2e_prompt() -> ChatPrompt {
    ChatPrompt::new(PromptSetting::Local, &[], "generate")
}

fn typing() -> Iri {
    iri(vocab::WDT_P31)
}

#[test]
fn cardinality_reply_passes_through() {
    let c = StructuredCardinality::parse(r#"{"include": true, "min": 1, "max": 1}"#).unwrap();
    assert_eq!(c.cardinality(), Some(Cardinality::ONE));
    let c = StructuredCardinality::parse("```json\n{\"include\": true, \"min\": 0, \"max\": \"*\"}\n```").unwrap();
    assert_eq!(c.cardinality(), Some(Cardinality::STAR));
    assert_eq!(StructuredCardinality::parse(r#"{"include": true, "min": 1, "max": -1}"#).unwrap().max, Max::Unbounded);
    assert!(!StructuredCardinality::parse(r#"{"include": false}"#).unwrap().include);
    assert!(StructuredCardinality::parse(r#"{"include": true, "min": 2, "max": 1}"#).is_err());
    assert!(StructuredCardinality::parse("no json").is_err());
}

#[test]
fn invalid_cardinality_is_re_requested_with_the_error() {
    let client = ScriptedClient::new([r#"{"include": true, "min": 2, "max": 1}"#, r#"{"include": true, "min": 1, "max": 1}"#]);
    let mut transcript = Vec::new();
    let c = predict_cardinality_structured(&organizer_record(), &client, &[], 2, &mut transcript).unwrap();
    assert_eq!(c.cardinality(), Some(Cardinality::ONE));
    let requests = client.requests();
    assert_eq!(requests.len(), 2);
    assert!(requests[0].last().unwrap().content.ends_with(CARDINALITY_INSTRUCTION));
    assert!(requests[1].last().unwrap().content.starts_with("The reply is invalid"));
    assert_eq!(transcript.len(), 2);
}

#[test]
fn retry_budget_is_bounded() {
    let client = ScriptedClient::new(["nope"; 5]);
    let mut transcript = Vec::new();
    let err = predict_cardinality_structured(&organizer_record(), &client, &[], 2, &mut transcript).unwrap_err();
    assert!(matches!(err, GenerationError::StructuredOutputFailed { .. }));
    assert_eq!(client.requests().len(), 3);
    assert_eq!(client.remaining(), 2);
}

#[test]
fn node_constraint_variants() {
    let pm = PrefixMap::well_known();
    let p = |s: &str| StructuredNodeConstraint::parse(s, &pm).unwrap();
    assert_eq!(p(r#"{"datatype": "xsd:dateTime"}"#), StructuredNodeConstraint::Datatype(iri(vocab::XSD_DATETIME)));
    assert_eq!(
        p(r#"{"referenced_classes": ["wd:Q6256"]}"#),
        StructuredNodeConstraint::ReferencedClasses(vec![iri("http://www.wikidata.org/entity/Q6256")])
    );
    assert_eq!(p("{}"), StructuredNodeConstraint::NodeKindIri);
    assert_eq!(p(r#"{"node_kind": "IRI"}"#), StructuredNodeConstraint::NodeKindIri);
    assert!(StructuredNodeConstraint::parse(r#"{"datatype": "xsd:string", "node_kind": "IRI"}"#, &pm).is_err());
    assert!(StructuredNodeConstraint::parse(r#"{"referenced_classes": []}"#, &pm).is_err());
    for v in [
        StructuredNodeConstraint::Datatype(iri(vocab::XSD_DATE)),
        StructuredNodeConstraint::ReferencedClasses(vec![iri("http://www.wikidata.org/entity/Q5")]),
        StructuredNodeConstraint::NodeKindIri,
    ] {
        assert_eq!(p(&v.to_json(&pm)), v);
    }
}

#[test]
fn node_step_uses_its_own_prompt() {
    let client = ScriptedClient::new([r#"{"referenced_classes": ["wd:Q43229"]}"#]);
    let mut t = Vec::new();
    let n = predict_node_constraint_structured(&organizer_record(), &client, &[], 0, &mut t).unwrap();
    assert_eq!(n, StructuredNodeConstraint::ReferencedClasses(vec![iri("http://www.wikidata.org/entity/Q43229")]));
}

#[test]
fn end_to_end_accepts_the_museum_schema() {
    let client = ScriptedClient::new([format!("```shex\n{}\n```", museum_text())]);
    let class = iri("http://www.wikidata.org/entity/Q33506");
    let g = generate_end_to_end(&e2e_prompt(), &class, &client, 2).unwrap();
    assert_eq!(g.schema.focus_class(), &class);
    assert_eq!(g.schema.start_shape().constraints.len(), 4);
}

#[test]
fn repair_loop_recovers_on_the_second_attempt() {
    let client = ScriptedClient::new(["<Museum> { wdt:P31 [".to_owned(), museum_text()]);
    let class = iri("http://www.wikidata.org/entity/Q33506");
    let g = generate_end_to_end(&e2e_prompt(), &class, &client, 1).unwrap();
    assert_eq!(g.transcript.len(), 2);
    let second = &client.requests()[1];
    assert!(second.last().unwrap().content.starts_with("The schema is not valid ShEx:"));
}

#[test]
fn repair_loop_gives_up_after_the_budget() {
    let client = ScriptedClient::new(["junk"; 4]);
    let err = generate_end_to_end(&e2e_prompt(), &iri("http://www.wikidata.org/entity/Q33506"), &client, 2).unwrap_err();
    match err {
        GenerationError::GenerationFailed { attempts, diagnostics, transcript } => {
            assert_eq!(attempts, 3);
            assert_eq!(transcript.len(), 3);
            assert!(!diagnostics.is_empty());
        }
        other => panic!("unexpected {other:?}"),
    }
    assert_eq!(client.remaining(), 1);
}

fn part(p: &str, c: Cardinality, node: StructuredNodeConstraint) -> Part {
    Part { predicate: iri(p), cardinality: StructuredCardinality::included(c), node }
}

#[test]
fn assembly_emits_referenced_shapes() {
    let class = iri("http://www.wikidata.org/entity/Q33506");
    let parts = [
        part(
            "http://www.wikidata.org/prop/direct/P17",
            Cardinality::ONE,
            StructuredNodeConstraint::ReferencedClasses(vec![iri("http://www.wikidata.org/entity/Q6256")]),
        ),
        part("http://www.wikidata.org/prop/direct/P856", Cardinality::STAR, StructuredNodeConstraint::NodeKindIri),
    ];
    let s = assemble_schema(&class, &parts, &typing()).unwrap();
    assert_eq!(s.shape_count(), 2);
    let start = s.start_shape();
    assert_eq!(start.constraints[0].predicate, typing());
    assert!(start.extra.contains(&typing()));
    let country = start.constraints.iter().find(|c| c.predicate.local_name() == "P17").unwrap();
    let NodeConstraint::ShapeRef(label) = &country.node else { panic!("expected a shape reference") };
    assert_eq!(s.shape(label).unwrap().typing_classes().into_iter().collect::<Vec<_>>(), [iri("http://www.wikidata.org/entity/Q6256")]);
    let text = serialize_shexc(&s).unwrap();
    assert_eq!(parse_shexc(&text).unwrap().with_focus_class(class), s);
}

#[test]
fn assembly_single_part_and_errors() {
    let class = iri("http://www.wikidata.org/entity/Q33506");
    let single = [part("http://www.wikidata.org/prop/direct/P856", Cardinality::STAR, StructuredNodeConstraint::NodeKindIri)];
    let s = assemble_schema(&class, &single, &typing()).unwrap();
    assert_eq!(s.start_shape().constraints.len(), 2);
    assert_eq!(s.shape_count(), 1);
    let dup = [single[0].clone(), single[0].clone()];
    assert!(matches!(assemble_schema(&class, &dup, &typing()), Err(AssemblyError::DuplicatePredicate(_))));
    assert!(matches!(assemble_schema(&class, &[], &typing()), Err(AssemblyError::Empty)));
}

fn scripted_global() -> FnClient<impl Fn(&[Message]) -> String + Send + Sync> {
    FnClient::new("rules", |messages: &[Message]| {
        let task = &messages.last().unwrap().content;
        let pred = task.split("'predicate_uri': '").nth(1).unwrap().split('\'').next().unwrap().to_owned();
        if task.ends_with(CARDINALITY_INSTRUCTION) {
            match pred.rsplit('/').next().unwrap() {
                "P3" => r#"{"include": false}"#.into(),
                "P1" => r#"{"include": true, "min": 1, "max": 1}"#.into(),
                _ => r#"{"include": true, "min": 0, "max": "*"}"#.into(),
            }
        } else if pred.ends_with("P1") {
            r#"{"datatype": "xsd:dateTime"}"#.into()
        } else {
            "{}".into()
        }
    })
}

fn global_records() -> Vec<shexgen_kg::GlobalPredicateRecord> {
    let class = "http://www.wikidata.org/entity/Q1";
    ["P1", "P2", "P3"]
        .iter()
        .map(|p| record(class, &format!("http://www.wikidata.org/prop/direct/{p}"), 10, &[(1, 9)], &[("IRI", 1.0)], &[]))
        .collect()
}

#[test]
fn global_generation_excludes_and_assembles() {
    let class = iri("http://www.wikidata.org/entity/Q1");
    let opts = GlobalOptions::new(typing());
    let g = generate_global(&class, &global_records(), &scripted_global(), &CardinalitySource::Llm, &Exemplars::default(), &opts).unwrap();
    assert_eq!(g.schema.start_shape().constraints.len(), 3);
    assert!(g.schema.start_shape().constraint(&iri("http://www.wikidata.org/prop/direct/P3")).is_none());
    let again = generate_global(&class, &global_records(), &scripted_global(), &CardinalitySource::Llm, &Exemplars::default(), &opts).unwrap();
    assert_eq!(serialize_shexc(&g.schema).unwrap(), serialize_shexc(&again.schema).unwrap());
}

#[test]
fn ml_source_supplies_only_the_bounds() {
    let class = iri("http://www.wikidata.org/entity/Q1");
    let opts = GlobalOptions::new(typing());
    let mut rows = separable_dataset(40, 3);
    for r in &mut rows {
        r.label = shexgen_pipeline::ml::CardinalityLabel::new(0, shexgen_pipeline::ml::MaxClass::Unbounded);
    }
    let model = train(ModelKind::Dt, &rows, &TrainParams::default(), 42).unwrap();
    let ml = CardinalitySource::Ml(Box::new(model));
    let llm = generate_global(&class, &global_records(), &scripted_global(), &CardinalitySource::Llm, &Exemplars::default(), &opts).unwrap();
    let hybrid = generate_global(&class, &global_records(), &scripted_global(), &ml, &Exemplars::default(), &opts).unwrap();
    for (a, b) in llm.schema.start_shape().constraints.iter().zip(&hybrid.schema.start_shape().constraints) {
        assert_eq!(a.predicate, b.predicate);
        assert_eq!(a.node, b.node);
        if a.predicate != typing() {
            assert_eq!(b.cardinality, Cardinality::STAR);
        }
    }
}

#[test]
fn per_predicate_failures_are_skipped() {
    let client = FnClient::new("flaky", |messages: &[Message]| {
        let task = &messages.iter().rev().find(|m| m.content.contains("'predicate_uri'")).unwrap().content;
        if task.contains("/P2'") {
            "garbage".into()
        } else if task.ends_with(CARDINALITY_INSTRUCTION) {
            r#"{"include": true, "min": 0, "max": 1}"#.into()
        } else {
            "{}".into()
        }
    });
    let class = iri("http://www.wikidata.org/entity/Q1");
    let g = generate_global(&class, &global_records(), &client, &CardinalitySource::Llm, &Exemplars::default(), &GlobalOptions::new(typing()))
        .unwrap();
    assert_eq!(g.skipped.len(), 1);
    assert_eq!(g.skipped[0].0.local_name(), "P2");
    assert_eq!(g.schema.start_shape().constraints.len(), 3);
}
