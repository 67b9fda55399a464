use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use std::sync::{Arc, Mutex};

use shexgen_core::{EvalError, Iri, SubclassOracle};

use crate::client::KgClient;
use crate::config::KgKind;
use crate::queries::ConstraintKind;

/// Subclass reasoning backed by live (or cached) KG queries, walking the
/// subclass predicate breadth-first up to the configured depth.
pub struct KgSubclassOracle {
    client: Arc<KgClient>,
    answers: Mutex<HashMap<(Iri, Iri), bool>>,
}

impl KgSubclassOracle {
    pub fn new(client: Arc<KgClient>) -> Self {
        KgSubclassOracle { client, answers: Mutex::new(HashMap::new()) }
    }

    fn search(&self, sub: &Iri, sup: &Iri) -> Result<bool, EvalError> {
        let depth = self.client.config().subclass_depth;
        let mut seen: HashSet<Iri> = HashSet::from([sub.clone()]);
        let mut queue = VecDeque::from([(sub.clone(), 0usize)]);
        while let Some((class, d)) = queue.pop_front() {
            if d == depth {
                continue;
            }
            let supers = self.client.direct_superclasses(&class).map_err(|e| EvalError::Oracle(e.to_string()))?;
            for s in supers {
                if &s == sup {
                    return Ok(true);
                }
                if seen.insert(s.clone()) {
                    queue.push_back((s, d + 1));
                }
            }
        }
        Ok(false)
    }
}

impl SubclassOracle for KgSubclassOracle {
    fn is_subclass_of(&self, sub: &Iri, sup: &Iri) -> Result<bool, EvalError> {
        if sub == sup {
            return Ok(true);
        }
        let key = (sub.clone(), sup.clone());
        if let Some(&v) = self.answers.lock().expect("oracle memo poisoned").get(&key) {
            return Ok(v);
        }
        let v = self.search(sub, sup)?;
        self.answers.lock().expect("oracle memo poisoned").insert(key, v);
        Ok(v)
    }

    fn value_type_classes(&self, predicate: &Iri) -> Result<BTreeSet<Iri>, EvalError> {
        if self.client.config().kg_kind != KgKind::Wikidata {
            return Ok(BTreeSet::new());
        }
        let refs = self
            .client
            .property_constraint(predicate, ConstraintKind::ValueType)
            .map_err(|e| EvalError::Oracle(e.to_string()))?;
        Ok(refs.into_iter().map(|c| c.iri).collect())
    }
}
