use std::collections::BTreeMap;

use bitflags::bitflags;
use serde::{Deserialize, Serialize};
use shexgen_core::Iri;

use crate::client::{ratio, ClassRef, KgClient};
use crate::config::KgKind;
use crate::error::KgError;
use crate::queries::ConstraintKind;
use crate::rdf::Triple;

bitflags! {
    /// Which parts of a record were successfully retrieved.
    #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
    pub struct Completeness: u16 {
        const LABELS = 1;
        const EXAMPLES = 1 << 1;
        const FREQUENCY = 1 << 2;
        const CARDINALITY = 1 << 3;
        const DATATYPES = 1 << 4;
        const OBJECT_CLASSES = 1 << 5;
        const OBJECT_STATS = 1 << 6;
        const CONSTRAINTS = 1 << 7;
    }
}

impl Completeness {
    pub const REQUIRED: Completeness = Completeness::FREQUENCY.union(Completeness::CARDINALITY);
}

/// Statistics about one predicate used by instances of one class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlobalPredicateRecord {
    pub class_uri: Iri,
    pub class_label: Option<String>,
    pub class_description: Option<String>,
    pub predicate_uri: Iri,
    pub predicate_label: Option<String>,
    pub predicate_description: Option<String>,
    pub instance_count: u64,
    pub triple_examples: Vec<Triple>,
    /// Fraction of instances with at least one value.
    pub frequency: f64,
    /// Fraction of all instances per occurrence count; keys are >= 1 and the
    /// remainder `1 - frequency` is the zero bucket.
    pub cardinality_distribution: BTreeMap<u32, f64>,
    /// Fraction of objects per datatype key (`IRI`, `bnode` or a datatype IRI).
    pub datatype_of_objects: BTreeMap<String, f64>,
    /// Fraction of distinct IRI objects typed with each class.
    pub object_class_distribution: BTreeMap<Iri, f64>,
    pub distinct_object_ratio: Option<f64>,
    pub subject_type_constraint: Option<Vec<ClassRef>>,
    pub value_type_constraint: Option<Vec<ClassRef>>,
    pub completeness: Completeness,
}

impl GlobalPredicateRecord {
    pub fn missing_fraction(&self) -> f64 {
        1.0 - self.frequency
    }

    pub fn is_usable(&self) -> bool {
        self.completeness.contains(Completeness::REQUIRED)
    }
}


/// Keeps optional parts best-effort, but never hides an offline cache miss.
fn optional<T>(r: Result<T, KgError>) -> Result<Option<T>, KgError> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(e @ KgError::CacheMiss { .. }) => Err(e),
        Err(e) => {
            log::warn!("optional statistic unavailable: {e}");
            Ok(None)
        }
    }
}

pub fn build_global_record(client: &KgClient, class: &Iri, predicate: &Iri) -> Result<GlobalPredicateRecord, KgError> {
    let mut done = Completeness::empty();
    let instance_count = client.instance_count(class)?;
    let missing = client.count_missing(class, predicate)?;
    let frequency = ratio(instance_count.saturating_sub(missing), instance_count);
    done |= Completeness::FREQUENCY;
    let cardinality_distribution = client
        .cardinality_distribution(class, predicate)?
        .into_iter()
        .map(|(k, n)| (k, ratio(n, instance_count)))
        .collect();
    done |= Completeness::CARDINALITY;

    let class_info = optional(client.entity_info(class))?;
    let predicate_info = optional(client.predicate_info(predicate))?;
    if class_info.is_some() && predicate_info.is_some() {
        done |= Completeness::LABELS;
    }
    let class_info = class_info.unwrap_or_default();
    let predicate_info = predicate_info.unwrap_or_default();

    let triple_examples = match optional(client.predicate_examples(class, predicate))? {
        Some(mut t) => {
            done |= Completeness::EXAMPLES;
            t.truncate(5);
            t
        }
        None => Vec::new(),
    };

    let (datatype_of_objects, object_class_distribution) = match optional(client.object_profiles(class, predicate))? {
        Some(p) => {
            done |= Completeness::DATATYPES | Completeness::OBJECT_CLASSES;
            p
        }
        None => Default::default(),
    };

    let distinct_object_ratio = optional(client.object_stats(class, predicate))?.map(|s| {
        done |= Completeness::OBJECT_STATS;
        ratio(s.distinct, s.total)
    });

    let (subject_type_constraint, value_type_constraint) = if client.config().kg_kind == KgKind::Wikidata {
        let s = optional(client.property_constraint(predicate, ConstraintKind::SubjectType))?;
        let v = optional(client.property_constraint(predicate, ConstraintKind::ValueType))?;
        if s.is_some() && v.is_some() {
            done |= Completeness::CONSTRAINTS;
        }
        (s.filter(|c| !c.is_empty()), v.filter(|c| !c.is_empty()))
    } else {
        (None, None)
    };

    Ok(GlobalPredicateRecord {
        class_uri: class.clone(),
        class_label: class_info.label,
        class_description: class_info.description,
        predicate_uri: predicate.clone(),
        predicate_label: predicate_info.label,
        predicate_description: predicate_info.description,
        instance_count,
        triple_examples,
        frequency,
        cardinality_distribution,
        datatype_of_objects,
        object_class_distribution,
        distinct_object_ratio,
        subject_type_constraint,
        value_type_constraint,
        completeness: done,
    })
}
