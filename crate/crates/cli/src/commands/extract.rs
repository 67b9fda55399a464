use std::path::Path;

use serde::{Deserialize, Serialize};
use shexgen_core::Iri;
use shexgen_kg::{GlobalPredicateRecord, KgClient, KgError, QueryCache, Triple};
use shexgen_pipeline::extract::{class_info, global_records, local_samples, triples_examples, DEFAULT_MAX_PREDICATES};
use shexgen_pipeline::{ClassInfo, InstanceSample};

use super::Method;
use crate::error::CliError;
use crate::manifest::Manifest;
use crate::outcome::{to_json, write_file, Outcome};
use crate::runtime::Runtime;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExtractOptions {
    pub samples: usize,
    pub max_predicates: usize,
}

impl Default for ExtractOptions {
    fn default() -> Self {
        ExtractOptions { samples: 5, max_predicates: DEFAULT_MAX_PREDICATES }
    }
}

/// Everything a generation method reads from the KG for one class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "setting", rename_all = "lowercase")]
pub enum Extraction {
    Local { class: ClassInfo, samples: Vec<InstanceSample> },
    Triples { class: ClassInfo, examples: Vec<(Iri, Vec<Triple>)> },
    Global { records: Vec<GlobalPredicateRecord> },
}

impl Extraction {
    pub fn rows(&self) -> usize {
        match self {
            Extraction::Local { samples, .. } => samples.iter().map(|s| s.triples.len()).sum(),
            Extraction::Triples { examples, .. } => examples.iter().map(|(_, t)| t.len()).sum(),
            Extraction::Global { records } => records.len(),
        }
    }
}

pub fn extract_for(client: &KgClient, class: &Iri, method: Method, opts: &ExtractOptions) -> Result<Extraction, KgError> {
    Ok(match method {
        Method::Local => Extraction::Local { class: class_info(client, class)?, samples: local_samples(client, class, opts.samples)? },
        Method::Triples => Extraction::Triples {
            class: class_info(client, class)?,
            examples: triples_examples(client, class, opts.max_predicates)?,
        },
        Method::Global | Method::Mined => Extraction::Global { records: global_records(client, class, opts.max_predicates)? },
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtractStatus {
    pub class_uri: Iri,
    pub label: String,
    pub ok: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub rows: usize,
    pub network_requests: u64,
    pub cache_hits: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtractReport {
    pub setting: Method,
    pub classes: Vec<ExtractStatus>,
    pub cache_keys: Vec<String>,
}

/// Runs the queries `method` needs for each selected class, filling the
/// cache. With `out_dir`, each class's extraction is also written to
/// `<slug>.<setting>.json`.
pub fn cmd_extract(
    manifest: &Manifest,
    selectors: &[String],
    method: Method,
    opts: &ExtractOptions,
    rt: &Runtime,
    out_dir: Option<&Path>,
) -> Result<Outcome<ExtractReport>, CliError> {
    let entries = manifest.select(selectors)?;
    let results = rt.map(&entries, |entry| {
        log::info!("extract {} ({method})", entry.label);
        let client = rt.client(entry)?;
        let outcome = extract_for(&client, &entry.class_uri, method, opts);
        let stats = client.stats();
        let mut status = ExtractStatus {
            class_uri: entry.class_uri.clone(),
            label: entry.label.clone(),
            ok: outcome.is_ok(),
            error: None,
            rows: 0,
            network_requests: stats.network_requests,
            cache_hits: stats.cache_hits,
        };
        match outcome {
            Ok(extraction) => {
                status.rows = extraction.rows();
                if let Some(dir) = out_dir {
                    write_file(&dir.join(format!("{}.{method}.json", entry.slug())), &to_json(&extraction))?;
                }
                Ok((status, None))
            }
            Err(e) => {
                log::error!("extract {}: {e}", entry.label);
                status.error = Some(e.to_string());
                Ok::<_, CliError>((status, Some(CliError::from(e))))
            }
        }
    });
    let mut classes = Vec::new();
    let mut failures = Vec::new();
    for (entry, r) in entries.iter().zip(results) {
        match r {
            Ok((status, err)) => {
                if let Some(e) = err {
                    failures.push((entry.label.clone(), e));
                }
                classes.push(status);
            }
            Err(e) => failures.push((entry.label.clone(), e)),
        }
    }
    let cache_keys = match &rt.cache_dir {
        Some(dir) => QueryCache::new(dir).keys()?,
        None => Vec::new(),
    };
    Ok(Outcome { value: ExtractReport { setting: method, classes, cache_keys }, total: entries.len(), failures })
}
