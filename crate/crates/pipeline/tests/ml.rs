use proptest::prelude::*;
use shexgen_core::{Cardinality, Max};
use shexgen_pipeline::ml::{
    evaluate_cardinality_accuracy, extract_features, fit_classifier, read_feature_csv, train, write_feature_csv, BoostParams,
    BoostedModel, CardinalityLabel, CardinalityModel, Classifier, FeatureVector, LabeledRow, MaxClass, ModelKind, TrainParams,
    TreeParams, DEFAULT_SEED,
};
use shexgen_testkit::{record, seeded, separable_dataset};
use rand::Rng;

const CLASS: &str = "http://www.wikidata.org/entity/Q1";
const PRED: &str = "http://www.wikidata.org/prop/direct/P1";

#[test]
fn features_from_all_single_values() {
    let f = extract_features(&record(CLASS, PRED, 10, &[(1, 10)], &[("http://www.w3.org/2001/XMLSchema#dateTime", 1.0)], &[])).unwrap();
    assert_eq!((f.missing_fraction, f.exactly_one_fraction, f.multi_fraction), (0.0, 1.0, 0.0));
    assert_eq!(f.max_observed_count, 1);
    assert_eq!(f.datatype, [true, false, false, false]);
}

#[test]
fn features_count_multi_values() {
    let f = extract_features(&record(CLASS, PRED, 10, &[(1, 5), (2, 5)], &[("IRI", 1.0)], &[])).unwrap();
    assert!((f.multi_fraction - 0.5).abs() < 1e-12);
    assert!((f.mean_count - 1.5).abs() < 1e-12);
    assert_eq!(f.datatype, [false, false, false, true]);
}

#[test]
fn incomplete_records_are_rejected() {
    let mut r = record(CLASS, PRED, 10, &[(1, 5)], &[], &[]);
    r.completeness = shexgen_kg::Completeness::LABELS;
    assert!(extract_features(&r).is_err());
}

proptest! {
    #[test]
    fn feature_fractions_partition(counts in proptest::collection::btree_map(1u32..6, 0u64..20, 0..5), extra in 0u64..20) {
        let used: u64 = counts.values().sum();
        let n = used + extra;
        prop_assume!(n > 0);
        let counts: Vec<(u32, u64)> = counts.into_iter().collect();
        let f = extract_features(&record(CLASS, PRED, n, &counts, &[], &[])).unwrap();
        prop_assert!((f.missing_fraction + f.exactly_one_fraction + f.multi_fraction - 1.0).abs() < 1e-9);
    }
}

#[test]
fn labels_compose_into_cardinalities() {
    assert_eq!(CardinalityLabel::new(1, MaxClass::One).to_cardinality(), Cardinality::ONE);
    assert_eq!(CardinalityLabel::new(0, MaxClass::Unbounded).to_cardinality(), Cardinality::STAR);
    assert_eq!(CardinalityLabel::from(Cardinality::bounded(0, 3).unwrap()).max_class, MaxClass::Unbounded);
    assert_eq!(CardinalityLabel::from(Cardinality::at_least(2)), CardinalityLabel::new(1, MaxClass::Unbounded));
}

#[test]
fn both_models_learn_the_separable_set() {
    let rows = separable_dataset(200, DEFAULT_SEED);
    let (train_rows, test_rows) = rows.split_at(100);
    for kind in [ModelKind::Dt, ModelKind::Gb] {
        let m = train(kind, train_rows, &TrainParams::default(), DEFAULT_SEED).unwrap();
        let acc = evaluate_cardinality_accuracy(&m, test_rows);
        assert!(acc.acc_combined >= 0.95, "{kind}: {acc:?}");
    }
}

#[test]
fn training_is_seed_deterministic() {
    let rows = separable_dataset(120, 5);
    let params = TrainParams { boost: BoostParams { subsample: 0.7, ..BoostParams::default() }, ..TrainParams::default() };
    for kind in [ModelKind::Dt, ModelKind::Gb] {
        let a = serde_json::to_string(&train(kind, &rows, &params, 9).unwrap()).unwrap();
        let b = serde_json::to_string(&train(kind, &rows, &params, 9).unwrap()).unwrap();
        assert_eq!(a, b);
    }
}

#[test]
fn single_class_target_gives_a_constant() {
    let mut rows = separable_dataset(30, 1);
    for r in &mut rows {
        r.label.min_class = 1;
    }
    let m = train(ModelKind::Gb, &rows, &TrainParams::default(), 1).unwrap();
    assert_eq!(m.min, Classifier::Constant { positive: true });
    let acc = evaluate_cardinality_accuracy(&m, &rows);
    assert_eq!(acc.acc_min, 1.0);
}

#[test]
fn models_round_trip_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let rows = separable_dataset(60, 2);
    let m = train(ModelKind::Gb, &rows, &TrainParams::default(), 4).unwrap();
    let path = dir.path().join("model.json");
    m.save(&path).unwrap();
    let back = CardinalityModel::load(&path).unwrap();
    assert_eq!(back, m);
    for r in &rows {
        assert_eq!(back.predict(&r.features), m.predict(&r.features));
    }
    let csv = dir.path().join("rows.csv");
    write_feature_csv(&csv, &rows).unwrap();
    let read = read_feature_csv(&csv).unwrap();
    assert_eq!(read.len(), rows.len());
    for (a, b) in read.iter().zip(&rows) {
        assert_eq!(a.label, b.label);
        assert_eq!(a.features.to_array(), b.features.to_array());
    }
}

fn random_rows(seed: u64, n: usize) -> Vec<LabeledRow> {
    let mut rng = seeded(seed);
    (0..n)
        .map(|i| {
            let v: [f64; 12] = std::array::from_fn(|_| f64::from(rng.gen_range(0u8..4)));
            LabeledRow {
                class_uri: "c".into(),
                predicate_uri: format!("p{i}"),
                features: FeatureVector::from_array(&v),
                label: CardinalityLabel::new(rng.gen_range(0..2), if rng.gen_bool(0.5) { MaxClass::One } else { MaxClass::Unbounded }),
            }
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn combined_accuracy_never_exceeds_either_target(seed in any::<u64>(), n in 5usize..60) {
        let rows = random_rows(seed, n);
        for kind in [ModelKind::Dt, ModelKind::Gb] {
            let params = TrainParams { boost: BoostParams { rounds: 10, ..BoostParams::default() }, ..TrainParams::default() };
            let m = train(kind, &rows, &params, seed).unwrap();
            let a = evaluate_cardinality_accuracy(&m, &rows);
            prop_assert!(a.acc_combined <= a.acc_min.min(a.acc_max));
        }
    }

    #[test]
    fn unlimited_tree_fits_consistent_data(xs in proptest::collection::btree_map(proptest::collection::vec(0u8..5, 3), any::<bool>(), 1..40)) {
        let x: Vec<Vec<f64>> = xs.keys().map(|k| k.iter().map(|v| f64::from(*v)).collect()).collect();
        let y: Vec<bool> = xs.values().copied().collect();
        let tree = fit_classifier(&x, &y, &TreeParams { max_depth: usize::MAX, min_leaf: 1 });
        for (xi, yi) in x.iter().zip(&y) {
            prop_assert_eq!(tree.eval(xi) > 0.5, *yi);
        }
    }

    #[test]
    fn boosting_loss_is_non_increasing(seed in any::<u64>(), n in 4usize..50, lr in 0.05f64..2.0) {
        let rows = random_rows(seed, n);
        let x: Vec<Vec<f64>> = rows.iter().map(|r| r.features.to_array().to_vec()).collect();
        let y: Vec<bool> = rows.iter().map(|r| r.label.min_class == 1).collect();
        let m = BoostedModel::fit(&x, &y, &BoostParams { rounds: 20, learning_rate: lr, ..BoostParams::default() }, seed);
        prop_assert!(m.training_loss.windows(2).all(|w| w[1] <= w[0] + 1e-12), "{:?}", m.training_loss);
    }

    #[test]
    fn tree_beats_the_majority_on_training_data(seed in any::<u64>(), n in 10usize..80) {
        let rows = random_rows(seed, n);
        let m = train(ModelKind::Dt, &rows, &TrainParams::default(), seed).unwrap();
        let acc = evaluate_cardinality_accuracy(&m, &rows);
        let ones = rows.iter().filter(|r| r.label.min_class == 1).count() as f64 / n as f64;
        prop_assert!(acc.acc_min + 1e-12 >= ones.max(1.0 - ones));
    }
}

#[test]
fn hand_built_predictions() {
    let m = CardinalityModel {
        kind: ModelKind::Dt,
        seed: 0,
        params: TrainParams::default(),
        feature_names: shexgen_pipeline::ml::FEATURE_NAMES.iter().map(|s| s.to_string()).collect(),
        min: Classifier::Constant { positive: false },
        max: Classifier::Constant { positive: true },
    };
    let f = separable_dataset(1, 0).remove(0).features;
    let c = m.predict(&f);
    assert_eq!((c.min(), c.max()), (0, Max::Unbounded));
}
