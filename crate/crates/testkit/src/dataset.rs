//! Labeled feature rows whose labels follow a known rule.

use rand::Rng;
use shexgen_pipeline::ml::{CardinalityLabel, FeatureVector, LabeledRow, MaxClass};

use crate::seeded;

/// `n` rows where `min_class` is 1 exactly when `missing_fraction < 0.1`,
/// and `max_class` is unbounded exactly when at least half of the instances
/// using the predicate carry it more than once (under 15% otherwise).
/// The other features are noise.
pub fn separable_dataset(n: usize, seed: u64) -> Vec<LabeledRow> {
    let mut rng = seeded(seed);
    (0..n)
        .map(|i| {
            let required = rng.gen_bool(0.5);
            let multi_valued = rng.gen_bool(0.5);
            let missing: f64 = if required { rng.gen_range(0.0..0.05) } else { rng.gen_range(0.2..0.8) };
            let multi = (1.0 - missing) * if multi_valued { rng.gen_range(0.5..1.0) } else { rng.gen_range(0.0..0.15) };
            let one = (1.0 - missing - multi).max(0.0);
            let mut datatype = [false; 4];
            datatype[rng.gen_range(0..4)] = true;
            let features = FeatureVector {
                frequency: 1.0 - missing,
                missing_fraction: missing,
                exactly_one_fraction: one,
                multi_fraction: multi,
                max_observed_count: if multi_valued { rng.gen_range(2..12) } else { rng.gen_range(1..4) },
                mean_count: 1.0 + rng.gen_range(0.0..2.0),
                distinct_object_ratio: rng.gen_range(0.0..1.0),
                datatype,
                has_value_type_constraint: rng.gen_bool(0.5),
            };
            let label = CardinalityLabel::new(
                u8::from(required),
                if multi_valued { MaxClass::Unbounded } else { MaxClass::One },
            );
            LabeledRow { class_uri: format!("urn:synthetic:class{}", i % 10), predicate_uri: format!("urn:synthetic:p{i}"), features, label }
        })
        .collect()
}
