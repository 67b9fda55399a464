//! Threshold-based schema mining from predicate statistics.

use serde::{Deserialize, Serialize};
use shexgen_core::{Cardinality, Iri, Max, Schema};
use shexgen_kg::GlobalPredicateRecord;

use crate::assemble::{build_schema, Part};
use crate::error::AssemblyError;
use crate::structured::{StructuredCardinality, StructuredNodeConstraint};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinerThresholds {
    pub include_min_frequency: f64,
    pub required_min_presence: f64,
    pub functional_min_share: f64,
    pub datatype_purity: f64,
    pub class_purity: f64,
}

impl Default for MinerThresholds {
    fn default() -> Self {
        MinerThresholds {
            include_min_frequency: 0.1,
            required_min_presence: 0.95,
            functional_min_share: 0.95,
            datatype_purity: 0.9,
            class_purity: 0.8,
        }
    }
}

impl MinerThresholds {
    pub fn validate(&self) -> Result<(), String> {
        let all = [
            ("include_min_frequency", self.include_min_frequency),
            ("required_min_presence", self.required_min_presence),
            ("functional_min_share", self.functional_min_share),
            ("datatype_purity", self.datatype_purity),
            ("class_purity", self.class_purity),
        ];
        match all.iter().find(|(_, v)| !(0.0..=1.0).contains(v)) {
            Some((name, v)) => Err(format!("{name} = {v} is outside [0, 1]")),
            None => Ok(()),
        }
    }
}

/// Entry with the largest share; ties go to the smallest key.
fn dominant<'a, K: Ord>(entries: impl Iterator<Item = (&'a K, &'a f64)>) -> Option<(&'a K, f64)>
where
    K: 'a,
{
    let mut best: Option<(&K, f64)> = None;
    for (k, v) in entries {
        if best.is_none_or(|(bk, bv)| *v > bv || (*v == bv && k < bk)) {
            best = Some((k, *v));
        }
    }
    best
}

pub fn mine_part(record: &GlobalPredicateRecord, t: &MinerThresholds) -> Option<Part> {
    if record.frequency < t.include_min_frequency {
        return None;
    }
    let min = u32::from(record.frequency >= t.required_min_presence);
    let at_most_one = record.missing_fraction() + record.cardinality_distribution.get(&1).copied().unwrap_or(0.0);
    let max = if at_most_one >= t.functional_min_share - 1e-12 { Max::Bounded(1) } else { Max::Unbounded };
    let cardinality = Cardinality::new(min, max).expect("min is at most 1");

    let literal_dt = dominant(record.datatype_of_objects.iter()).filter(|(k, _)| k.as_str() != "IRI" && k.as_str() != "bnode");
    let node = match literal_dt {
        Some((dt, share)) if share >= t.datatype_purity => match Iri::new(dt.as_str()) {
            Ok(iri) => StructuredNodeConstraint::Datatype(iri),
            Err(_) => StructuredNodeConstraint::NodeKindIri,
        },
        _ => match dominant(record.object_class_distribution.iter()) {
            Some((class, share)) if share >= t.class_purity => StructuredNodeConstraint::ReferencedClasses(vec![class.clone()]),
            _ => StructuredNodeConstraint::NodeKindIri,
        },
    };
    Some(Part { predicate: record.predicate_uri.clone(), cardinality: StructuredCardinality::included(cardinality), node })
}

/// Deterministic: the same records and thresholds give the same schema.
/// Records for the typing predicate are ignored.
pub fn mine_baseline_schema(class: &Iri, records: &[GlobalPredicateRecord], t: &MinerThresholds, typing: &Iri) -> Result<Schema, AssemblyError> {
    let parts: Vec<Part> = records.iter().filter(|r| r.predicate_uri != *typing).filter_map(|r| mine_part(r, t)).collect();
    build_schema(class, &parts, typing)
}
