use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use shexgen_core::{
    canonicalize, class_set_label, Cardinality, Iri, NodeConstraint, PrefixMap, Schema, Shape, ShapeLabel,
    TripleConstraint, ValueSetItem,
};

use crate::error::AssemblyError;
use crate::structured::{StructuredCardinality, StructuredNodeConstraint};

/// One predicate's generated constraint before assembly.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Part {
    pub predicate: Iri,
    pub cardinality: StructuredCardinality,
    pub node: StructuredNodeConstraint,
}

fn typing_constraint(typing: &Iri, classes: &[Iri]) -> TripleConstraint {
    let values = classes.iter().cloned().map(ValueSetItem::Iri).collect();
    TripleConstraint::new(typing.clone(), NodeConstraint::ValueSet(values), Cardinality::ONE)
}

/// Builds the start shape for `class` from the included parts; referenced
/// classes become small typing-only shapes.
pub fn assemble_schema(class: &Iri, parts: &[Part], typing: &Iri) -> Result<Schema, AssemblyError> {
    if !parts.iter().any(|p| p.cardinality.include) {
        return Err(AssemblyError::Empty);
    }
    build_schema(class, parts, typing)
}

/// As [`assemble_schema`], but an empty part list yields a typing-only shape.
pub fn build_schema(class: &Iri, parts: &[Part], typing: &Iri) -> Result<Schema, AssemblyError> {
    let start = ShapeLabel::from(class);
    let mut start_shape = Shape::new(start.clone());
    start_shape.extra.insert(typing.clone());
    start_shape.constraints.push(typing_constraint(typing, std::slice::from_ref(class)));

    let mut seen = BTreeSet::new();
    let mut referenced: BTreeMap<BTreeSet<Iri>, ShapeLabel> = BTreeMap::new();
    for part in parts {
        if part.predicate == *typing {
            return Err(AssemblyError::TypingPredicate(part.predicate.clone()));
        }
        if !seen.insert(part.predicate.clone()) {
            return Err(AssemblyError::DuplicatePredicate(part.predicate.clone()));
        }
        if !part.cardinality.include {
            continue;
        }
        let cardinality = part.cardinality.cardinality().ok_or_else(|| AssemblyError::InvalidCardinality(part.predicate.clone()))?;
        let node = match &part.node {
            StructuredNodeConstraint::Datatype(d) => NodeConstraint::Datatype(d.clone()),
            StructuredNodeConstraint::ValueList(v) => NodeConstraint::ValueSet(v.clone()),
            StructuredNodeConstraint::NodeKindIri => NodeConstraint::NodeKindIri,
            StructuredNodeConstraint::ReferencedClasses(classes) => {
                let set: BTreeSet<Iri> = classes.iter().cloned().collect();
                let label = if set.len() == 1 && set.contains(class) {
                    start.clone()
                } else {
                    referenced.entry(set).or_insert_with_key(|s| ShapeLabel::new(class_set_label(s))).clone()
                };
                NodeConstraint::ShapeRef(label)
            }
        };
        start_shape.constraints.push(TripleConstraint::new(part.predicate.clone(), node, cardinality));
    }

    let mut shapes = vec![start_shape];
    for (classes, label) in referenced {
        let mut shape = Shape::new(label);
        shape.extra.insert(typing.clone());
        let ordered: Vec<Iri> = classes.into_iter().collect();
        shape.constraints.push(typing_constraint(typing, &ordered));
        shapes.push(shape);
    }
    let schema = Schema::new(PrefixMap::well_known(), start, shapes, class.clone())?;
    Ok(canonicalize(&schema))
}
