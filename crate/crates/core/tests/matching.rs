use proptest::prelude::*;
use shexgen_core::eval::{categorize_errors_with, evaluate_pair_with};
use shexgen_core::{
    cardinality_loosened, categorize_errors, constraint_matches, evaluate_pair, Cardinality, CardinalityMode,
    DatatypeMapping, EvalError, Iri, MatchContext, MatchCriteria, NodeConstraint, NodeMode, Schema, StaticOracle,
    TripleConstraint,
};
use shexgen_testkit::{drop_constraints, fixture_schema, fixture_schemas, mutate_schema, seeded};

fn wd(id: &str) -> Iri {
    Iri::new(format!("http://www.wikidata.org/entity/{id}")).unwrap()
}

fn wdt(id: &str) -> Iri {
    Iri::new(format!("http://www.wikidata.org/prop/direct/{id}")).unwrap()
}

fn xsd(local: &str) -> Iri {
    Iri::new(format!("http://www.w3.org/2001/XMLSchema#{local}")).unwrap()
}

fn card(min: u32, max: Option<u32>) -> Cardinality {
    max.map_or(Cardinality::at_least(min), |m| Cardinality::bounded(min, m).unwrap())
}

#[test]
fn self_evaluation_is_perfect_under_every_criterion() {
    let mapping = DatatypeMapping::default();
    let oracle = StaticOracle::new();
    let ctx = MatchContext::new(&mapping).with_oracle(&oracle);
    for (name, gt) in fixture_schemas() {
        for criteria in MatchCriteria::all() {
            let r = evaluate_pair(&gt, &gt, criteria, &ctx).unwrap();
            assert_eq!((r.precision, r.recall, r.f1), (1.0, 1.0, 1.0), "{name} {criteria}");
            assert_eq!(r.error_breakdown.correct, gt.constraint_count());
        }
    }
}

#[test]
fn missing_one_predicate() {
    let gt = fixture_schema("museum");
    let gen = gt.retain_start_constraints(|c| c.predicate != wdt("P17"));
    let mapping = DatatypeMapping::default();
    let r = evaluate_pair(&gen, &gt, MatchCriteria::EXACT, &MatchContext::new(&mapping)).unwrap();
    assert_eq!((r.precision, r.recall), (1.0, 0.75));
    assert_eq!(r.error_breakdown.missing_predicate, 1);
}

#[test]
fn empty_generation_scores_zero() {
    let gt = fixture_schema("museum");
    let mapping = DatatypeMapping::default();
    let r = evaluate_pair(&Schema::empty(gt.focus_class().clone()), &gt, MatchCriteria::EXACT, &MatchContext::new(&mapping)).unwrap();
    assert_eq!((r.precision, r.recall, r.f1), (0.0, 0.0, 0.0));
    assert_eq!(r.error_breakdown.missing_predicate, 4);
}

#[test]
fn subclass_match_through_oracle() {
    let gt = fixture_schema("museum");
    let text = std::fs::read_to_string(shexgen_testkit::fixtures_dir().join("schemas/museum.shex"))
        .unwrap()
        .replace("wd:Q6256", "wd:Q7275");
    let gen = shexgen_core::parse_shexc(&text).unwrap();
    let mapping = DatatypeMapping::default();
    let mut oracle = StaticOracle::new();
    let exact = evaluate_pair(&gen, &gt, MatchCriteria::EXACT, &MatchContext::new(&mapping)).unwrap();
    assert_eq!(exact.matched_count, 3);
    let sub = MatchCriteria::new(NodeMode::Subclass, CardinalityMode::Exact);
    let r = evaluate_pair(&gen, &gt, sub, &MatchContext::new(&mapping).with_oracle(&oracle)).unwrap();
    assert_eq!(r.matched_count, 3);
    oracle.add_subclass(wd("Q6256"), wd("Q7275"));
    let r = evaluate_pair(&gen, &gt, sub, &MatchContext::new(&mapping).with_oracle(&oracle)).unwrap();
    assert_eq!(r.matched_count, 4);
}

#[test]
fn value_type_fallback_only_when_enabled() {
    let gt = fixture_schema("museum");
    let text = std::fs::read_to_string(shexgen_testkit::fixtures_dir().join("schemas/museum.shex"))
        .unwrap()
        .replace("wd:Q6256", "wd:Q3624078");
    let gen = shexgen_core::parse_shexc(&text).unwrap();
    let mapping = DatatypeMapping::default();
    let mut oracle = StaticOracle::new();
    oracle.add_value_type(wdt("P17"), wd("Q3624078"));
    let sub = MatchCriteria::new(NodeMode::Subclass, CardinalityMode::Exact);
    let off = evaluate_pair(&gen, &gt, sub, &MatchContext::new(&mapping).with_oracle(&oracle)).unwrap();
    let on = evaluate_pair(&gen, &gt, sub, &MatchContext::new(&mapping).with_oracle(&oracle).with_value_type_fallback(true)).unwrap();
    assert_eq!((off.matched_count, on.matched_count), (3, 4));
}

#[test]
fn subclass_without_oracle_is_an_error() {
    let gt = fixture_schema("museum");
    let mapping = DatatypeMapping::default();
    let sub = MatchCriteria::new(NodeMode::Subclass, CardinalityMode::Loosened);
    assert!(matches!(evaluate_pair(&gt, &gt, sub, &MatchContext::new(&mapping)), Err(EvalError::OracleUnavailable)));
}

#[test]
fn datatype_compatibility() {
    let gt_schema = fixture_schema("museum");
    let gt = TripleConstraint::new(wdt("P1174"), NodeConstraint::Datatype(xsd("decimal")), Cardinality::STAR);
    let gen = TripleConstraint::new(wdt("P1174"), NodeConstraint::Datatype(xsd("integer")), Cardinality::STAR);
    let mapping = DatatypeMapping::default();
    let ctx = MatchContext::new(&mapping);
    let dt = MatchCriteria::new(NodeMode::Datatype, CardinalityMode::Exact);
    assert!(constraint_matches(&gt, &gen, dt, &ctx, &gt_schema, &gt_schema).unwrap());
    assert!(!constraint_matches(&gt, &gen, MatchCriteria::EXACT, &ctx, &gt_schema, &gt_schema).unwrap());
    let as_iri = TripleConstraint::new(wdt("P1174"), NodeConstraint::NodeKindIri, Cardinality::STAR);
    assert!(!constraint_matches(&gt, &as_iri, dt, &ctx, &gt_schema, &gt_schema).unwrap());
}

#[test]
fn unmapped_datatype_falls_back_to_identity() {
    let airport = fixture_schema("airport");
    let mapping = DatatypeMapping::default();
    let dt = MatchCriteria::new(NodeMode::Datatype, CardinalityMode::Exact);
    let r = evaluate_pair(&airport, &airport, dt, &MatchContext::new(&mapping)).unwrap();
    assert_eq!(r.f1, 1.0);
}

#[test]
fn single_cardinality_change_is_wrong_cardinality() {
    let gt = fixture_schema("museum");
    let mut shapes: Vec<_> = gt.shapes().cloned().collect();
    let p17 = shapes[0].constraints.iter_mut().find(|c| c.predicate == wdt("P17")).unwrap();
    p17.cardinality = Cardinality::OPTIONAL;
    let gen = Schema::new(gt.prefixes().clone(), gt.start_label().clone(), shapes, gt.focus_class().clone()).unwrap();
    let b = categorize_errors(&gen, &gt);
    assert_eq!((b.correct, b.wrong_cardinality, b.total()), (3, 1, 4));
}

const FOUR: [(u32, Option<u32>); 4] = [(1, Some(1)), (0, Some(1)), (1, None), (0, None)];

#[test]
fn loosened_truth_table() {
    // Rows: ground truth; columns: generated.
    let expected = [
        [true, true, true, true],
        [false, true, false, true],
        [false, false, true, true],
        [false, false, false, true],
    ];
    for (i, gt) in FOUR.iter().enumerate() {
        for (j, gen) in FOUR.iter().enumerate() {
            assert_eq!(cardinality_loosened(&card(gt.0, gt.1), &card(gen.0, gen.1)), expected[i][j], "{gt:?} in {gen:?}");
        }
    }
}

#[test]
fn relaxations_never_lower_f1_on_mutated_pairs() {
    let fixtures = fixture_schemas();
    let mapping = DatatypeMapping::default();
    let mut rng = seeded(7);
    for i in 0..100 {
        let (name, gt) = &fixtures[i % fixtures.len()];
        let m = mutate_schema(&mut rng, gt);
        let ctx = MatchContext::new(&mapping).with_oracle(&m.oracle);
        let f1 = |c: MatchCriteria| evaluate_pair(&m.schema, gt, c, &ctx).unwrap().f1;
        let base = f1(MatchCriteria::EXACT);
        for c in MatchCriteria::all() {
            assert!(f1(c) >= base, "pair {i} ({name}) {c}");
        }
        let sub_l = f1(MatchCriteria::new(NodeMode::Subclass, CardinalityMode::Loosened));
        assert!(sub_l >= f1(MatchCriteria::new(NodeMode::Subclass, CardinalityMode::Exact)));
        assert!(sub_l >= f1(MatchCriteria::new(NodeMode::Exact, CardinalityMode::Loosened)));
        let dt_l = f1(MatchCriteria::new(NodeMode::Datatype, CardinalityMode::Loosened));
        assert!(dt_l >= f1(MatchCriteria::new(NodeMode::Datatype, CardinalityMode::Exact)));
        let b = categorize_errors(&m.schema, gt);
        assert_eq!(b.total(), gt.constraint_count(), "pair {i}");
    }
}

#[test]
fn breakdown_criteria_is_configurable() {
    let gt = fixture_schema("museum");
    let mut shapes: Vec<_> = gt.shapes().cloned().collect();
    for c in shapes[0].constraints.iter_mut() {
        if c.predicate == wdt("P1174") {
            c.node = NodeConstraint::Datatype(xsd("integer"));
        }
    }
    let gen = Schema::new(gt.prefixes().clone(), gt.start_label().clone(), shapes, gt.focus_class().clone()).unwrap();
    let mapping = DatatypeMapping::default();
    let ctx = MatchContext::new(&mapping);
    let dt = MatchCriteria::new(NodeMode::Datatype, CardinalityMode::Exact);
    assert_eq!(categorize_errors(&gen, &gt).wrong_node_constraint, 1);
    assert_eq!(categorize_errors_with(&gen, &gt, dt, &ctx).unwrap().correct, 4);
    let r = evaluate_pair_with(&gen, &gt, MatchCriteria::EXACT, dt, &ctx).unwrap();
    assert_eq!((r.matched_count, r.error_breakdown.correct), (3, 4));
}

fn any_card() -> impl Strategy<Value = Cardinality> {
    (0u32..5, prop::option::of(0u32..5)).prop_map(|(a, b)| match b {
        Some(b) => Cardinality::bounded(a.min(b), a.max(b)).unwrap(),
        None => Cardinality::at_least(a),
    })
}

proptest! {
    #[test]
    fn loosened_is_a_partial_order(a in any_card(), b in any_card(), c in any_card()) {
        prop_assert!(cardinality_loosened(&a, &a));
        if cardinality_loosened(&a, &b) && cardinality_loosened(&b, &a) {
            prop_assert_eq!(a, b);
        }
        if cardinality_loosened(&a, &b) && cardinality_loosened(&b, &c) {
            prop_assert!(cardinality_loosened(&a, &c));
        }
        prop_assert_eq!(cardinality_loosened(&a, &b), b.contains(&a));
    }

    #[test]
    fn matched_count_is_side_independent(seed in any::<u64>(), which in 0usize..6) {
        let fixtures = fixture_schemas();
        let gt = &fixtures[which % fixtures.len()].1;
        let m = mutate_schema(&mut seeded(seed), gt);
        let mapping = DatatypeMapping::default();
        let ctx = MatchContext::new(&mapping).with_oracle(&m.oracle);
        let fwd = evaluate_pair(&m.schema, gt, MatchCriteria::EXACT, &ctx).unwrap();
        let back = evaluate_pair(gt, &m.schema, MatchCriteria::EXACT, &ctx).unwrap();
        prop_assert_eq!(fwd.matched_count, back.matched_count);
        prop_assert_eq!(fwd.precision, back.recall);
        let dropped = drop_constraints(gt, 1);
        let r = evaluate_pair(&dropped, gt, MatchCriteria::EXACT, &ctx).unwrap();
        prop_assert_eq!(r.matched_count, gt.constraint_count() - 1);
    }
}
