//! Pulls prompt inputs for one class out of a [`KgClient`].

use shexgen_core::Iri;
use shexgen_kg::queries::EXAMPLE_INSTANCES;
use shexgen_kg::{build_global_record, GlobalPredicateRecord, KgClient, KgError, Triple};

use crate::prompt::{ClassInfo, InstanceSample};

/// Upper bound on predicates taken per class, by descending frequency.
pub const DEFAULT_MAX_PREDICATES: usize = 40;

pub fn class_info(client: &KgClient, class: &Iri) -> Result<ClassInfo, KgError> {
    let info = client.entity_info(class)?;
    Ok(ClassInfo { iri: class.clone(), label: info.label })
}

pub fn local_samples(client: &KgClient, class: &Iri, n: usize) -> Result<Vec<InstanceSample>, KgError> {
    let mut out = Vec::new();
    for instance in client.sample_instances(class, n)? {
        let label = client.entity_info(&instance)?.label;
        let triples = client.instance_triples(&instance)?;
        out.push(InstanceSample { instance, label, triples });
    }
    Ok(out)
}

/// Example triples for the typing predicate and then each candidate
/// predicate, most frequent first.
pub fn triples_examples(client: &KgClient, class: &Iri, max_predicates: usize) -> Result<Vec<(Iri, Vec<Triple>)>, KgError> {
    let typing = client.config().typing_predicate.clone();
    let mut predicates = vec![typing];
    predicates.extend(client.candidate_predicates(class)?.into_iter().take(max_predicates).map(|p| p.predicate));
    let mut out = Vec::new();
    for p in predicates {
        let mut triples = client.predicate_examples(class, &p)?;
        triples.truncate(EXAMPLE_INSTANCES);
        if !triples.is_empty() {
            out.push((p, triples));
        }
    }
    Ok(out)
}

pub fn global_records(client: &KgClient, class: &Iri, max_predicates: usize) -> Result<Vec<GlobalPredicateRecord>, KgError> {
    client
        .candidate_predicates(class)?
        .into_iter()
        .take(max_predicates)
        .map(|p| build_global_record(client, class, &p.predicate))
        .collect()
}
