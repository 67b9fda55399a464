use std::path::Path;

use serde::Serialize;

use crate::error::CliError;

/// The result of a batch command: per-class output plus the classes that
/// failed. Successful classes are kept when others fail.
#[derive(Debug, Clone)]
pub struct Outcome<T> {
    pub value: T,
    pub total: usize,
    pub failures: Vec<(String, CliError)>,
}

impl<T> Outcome<T> {
    /// `Ok` when nothing failed; the failure itself when every class failed
    /// for the same kind of reason; `Partial` otherwise.
    pub fn status(&self) -> Result<(), CliError> {
        match self.failures.first() {
            None => Ok(()),
            Some((_, first)) => {
                let uniform = self.failures.iter().all(|(_, e)| e.exit_code() == first.exit_code());
                if self.failures.len() == self.total && uniform {
                    Err(first.clone())
                } else {
                    Err(CliError::Partial { failed: self.failures.len(), total: self.total })
                }
            }
        }
    }
}

pub fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    shexgen_kg::cache::write_atomic(path, text.as_bytes()).map_err(|e| CliError::Other(format!("{}: {e}", path.display())))
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable output");
    s.push('\n');
    s
}
