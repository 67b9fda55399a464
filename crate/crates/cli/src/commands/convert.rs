use std::fs;
use std::path::Path;
use std::str::FromStr;

use shexgen_core::{canonicalize, parse_shexc, serialize_shexc, to_canonical_json};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    Shexc,
    Json,
}

impl FromStr for Target {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "shexc" | "shex" => Ok(Target::Shexc),
            "json" => Ok(Target::Json),
            other => Err(format!("unknown target {other:?} (expected shexc or json)")),
        }
    }
}

/// Parses a ShExC file and prints it in canonical ShExC or canonical JSON.
pub fn cmd_convert(path: &Path, to: Target) -> Result<String, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let schema = parse_shexc(&text).map_err(|e| CliError::Parse(format!("{}:\n{e}", path.display())))?;
    match to {
        Target::Shexc => serialize_shexc(&canonicalize(&schema)).map_err(|e| CliError::Parse(e.to_string())),
        Target::Json => {
            let mut s = to_canonical_json(&schema);
            s.push('\n');
            Ok(s)
        }
    }
}
