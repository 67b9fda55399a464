use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use shexgen_core::{parse_shexc, Iri, Schema};
use shexgen_kg::{EndpointConfig, KgKind};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub class_uri: Iri,
    pub label: String,
    pub kg_kind: KgKind,
    pub endpoint_url: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub typing_predicate: Option<Iri>,
    /// Relative paths resolve against the manifest's directory.
    pub ground_truth_path: PathBuf,
}

impl ManifestEntry {
    /// File-name stem used for every per-class artifact.
    pub fn slug(&self) -> String {
        let mut s: String = self
            .label
            .trim()
            .chars()
            .map(|c| if c.is_ascii_alphanumeric() { c.to_ascii_lowercase() } else { '_' })
            .collect();
        while s.contains("__") {
            s = s.replace("__", "_");
        }
        s.trim_matches('_').to_owned()
    }

    pub fn typing(&self) -> Iri {
        self.typing_predicate.clone().unwrap_or_else(|| self.kg_kind.default_typing_predicate())
    }

    pub fn endpoint_config(&self) -> EndpointConfig {
        let mut cfg = EndpointConfig::new(self.kg_kind, self.endpoint_url.clone());
        cfg.typing_predicate = self.typing();
        cfg
    }

    pub fn matches(&self, selector: &str) -> bool {
        self.class_uri.as_str() == selector || self.label.eq_ignore_ascii_case(selector) || self.slug() == selector
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub dataset_name: String,
    pub entries: Vec<ManifestEntry>,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl Manifest {
    /// Loads and validates a manifest: unique class URIs and slugs, and
    /// every ground-truth schema must parse.
    pub fn load(path: &Path) -> Result<Manifest, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let mut m: Manifest = serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        m.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.entries.is_empty() {
            return Err(CliError::Config("manifest has no entries".into()));
        }
        let mut uris = BTreeSet::new();
        let mut slugs = BTreeSet::new();
        for e in &self.entries {
            if !uris.insert(e.class_uri.clone()) {
                return Err(CliError::Config(format!("duplicate class_uri {}", e.class_uri)));
            }
            let slug = e.slug();
            if slug.is_empty() || !slugs.insert(slug.clone()) {
                return Err(CliError::Config(format!("label {:?} does not give a unique file name", e.label)));
            }
            if e.endpoint_url.trim().is_empty() {
                return Err(CliError::Config(format!("{}: empty endpoint_url", e.class_uri)));
            }
            self.ground_truth(e)?;
        }
        Ok(())
    }

    pub fn ground_truth_file(&self, entry: &ManifestEntry) -> PathBuf {
        self.base_dir.join(&entry.ground_truth_path)
    }

    pub fn ground_truth(&self, entry: &ManifestEntry) -> Result<Schema, CliError> {
        let path = self.ground_truth_file(entry);
        let text = fs::read_to_string(&path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let schema = parse_shexc(&text).map_err(|e| CliError::Parse(format!("{}:\n{e}", path.display())))?;
        Ok(schema.with_focus_class(entry.class_uri.clone()))
    }

    /// Entries named by `selectors` (class URI, label or slug), in manifest
    /// order; all entries when `selectors` is empty.
    pub fn select(&self, selectors: &[String]) -> Result<Vec<&ManifestEntry>, CliError> {
        if selectors.is_empty() {
            return Ok(self.entries.iter().collect());
        }
        for s in selectors {
            if !self.entries.iter().any(|e| e.matches(s)) {
                return Err(CliError::Config(format!("no manifest entry matches {s:?}")));
            }
        }
        Ok(self.entries.iter().filter(|e| selectors.iter().any(|s| e.matches(s))).collect())
    }
}
