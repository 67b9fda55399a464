//! On-disk result cache: one JSON file per (normalized query, endpoint) key.

use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::KgError;
use crate::results::SparqlResults;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheEntry {
    pub endpoint: String,
    pub query: String,
    /// Seconds since the Unix epoch at which the result was fetched.
    pub timestamp: u64,
    pub results: SparqlResults,
}

/// Whitespace-insensitive form of a query used for keying.
pub fn normalize_query(query: &str) -> String {
    query.split_whitespace().collect::<Vec<_>>().join(" ")
}

pub fn cache_key(endpoint: &str, query: &str) -> String {
    let mut h = Sha256::new();
    h.update(normalize_query(query).as_bytes());
    h.update(b"\n");
    h.update(endpoint.trim().as_bytes());
    hex::encode(h.finalize())
}

pub struct QueryCache {
    dir: PathBuf,
    locks: Mutex<HashMap<String, Arc<Mutex<()>>>>,
}

impl QueryCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        QueryCache { dir: dir.into(), locks: Mutex::new(HashMap::new()) }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path_for(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.json"))
    }

    /// Per-key lock that serializes fetch-and-store for one key.
    pub fn key_lock(&self, key: &str) -> Arc<Mutex<()>> {
        let mut locks = self.locks.lock().expect("cache lock map poisoned");
        locks.entry(key.to_owned()).or_default().clone()
    }

    pub fn get(&self, key: &str) -> Result<Option<CacheEntry>, KgError> {
        let path = self.path_for(key);
        match fs::read_to_string(&path) {
            Ok(text) => serde_json::from_str(&text)
                .map(Some)
                .map_err(|e| KgError::Io(format!("corrupt cache entry {}: {e}", path.display()))),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(e.into()),
        }
    }

    pub fn put(&self, key: &str, endpoint: &str, query: &str, results: &SparqlResults) -> Result<CacheEntry, KgError> {
        fs::create_dir_all(&self.dir)?;
        let timestamp = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        let entry = CacheEntry { endpoint: endpoint.to_owned(), query: query.to_owned(), timestamp, results: results.clone() };
        let mut text = serde_json::to_string_pretty(&entry).map_err(|e| KgError::Io(e.to_string()))?;
        text.push('\n');
        write_atomic(&self.path_for(key), text.as_bytes())?;
        Ok(entry)
    }

    pub fn keys(&self) -> Result<Vec<String>, KgError> {
        let mut keys = Vec::new();
        if !self.dir.exists() {
            return Ok(keys);
        }
        for entry in fs::read_dir(&self.dir)? {
            let path = entry?.path();
            if path.extension().is_some_and(|e| e == "json") {
                if let Some(stem) = path.file_stem() {
                    keys.push(stem.to_string_lossy().into_owned());
                }
            }
        }
        keys.sort();
        Ok(keys)
    }
}

/// Writes to a sibling temporary file and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    fs::create_dir_all(dir)?;
    let tmp = dir.join(format!(
        ".{}.{}.tmp",
        path.file_name().map(|n| n.to_string_lossy()).unwrap_or_default(),
        std::process::id()
    ));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)
}
