use std::path::PathBuf;
use std::sync::Arc;

use shexgen_kg::{HttpTransport, KgClient, QueryCache, Transport};

use crate::error::CliError;
use crate::manifest::ManifestEntry;

/// Shared execution settings for one command invocation.
#[derive(Clone)]
pub struct Runtime {
    pub transport: Arc<dyn Transport>,
    pub cache_dir: Option<PathBuf>,
    pub offline: bool,
    pub jobs: usize,
}

impl Runtime {
    pub fn http(cache_dir: Option<PathBuf>, offline: bool, jobs: usize) -> Self {
        Runtime { transport: Arc::new(HttpTransport::new()), cache_dir, offline, jobs }
    }

    pub fn with_transport(transport: Arc<dyn Transport>, cache_dir: Option<PathBuf>, offline: bool) -> Self {
        Runtime { transport, cache_dir, offline, jobs: 1 }
    }

    pub fn jobs(mut self, jobs: usize) -> Self {
        self.jobs = jobs.max(1);
        self
    }

    /// A fresh client for one class; all clients share the on-disk cache.
    pub fn client(&self, entry: &ManifestEntry) -> Result<Arc<KgClient>, CliError> {
        if self.offline && self.cache_dir.is_none() {
            return Err(CliError::Config("--offline requires --cache-dir".into()));
        }
        let cache = self.cache_dir.as_ref().map(QueryCache::new);
        Ok(Arc::new(KgClient::new(entry.endpoint_config(), self.transport.clone(), cache, self.offline)?))
    }

    /// Runs `f` over `items` on a pool of `jobs` threads, keeping input order.
    pub fn map<T: Sync, R: Send>(&self, items: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
        use rayon::prelude::*;
        if self.jobs <= 1 {
            return items.iter().map(f).collect();
        }
        match rayon::ThreadPoolBuilder::new().num_threads(self.jobs).build() {
            Ok(pool) => pool.install(|| items.par_iter().map(&f).collect()),
            Err(_) => items.iter().map(f).collect(),
        }
    }
}
