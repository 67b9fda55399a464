pub mod convert;
pub mod evaluate;
pub mod extract;
pub mod generate;
pub mod report;
pub mod train;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use shexgen_pipeline::PromptSetting;

/// How a schema is produced: one of the three prompt settings or the
/// statistics-only miner.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Local,
    Triples,
    Global,
    Mined,
}

impl Method {
    pub fn prompt_setting(self) -> Option<PromptSetting> {
        match self {
            Method::Local => Some(PromptSetting::Local),
            Method::Triples => Some(PromptSetting::Triples),
            Method::Global => Some(PromptSetting::Global),
            Method::Mined => None,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.prompt_setting() {
            Some(s) => s.fmt(f),
            None => f.write_str("mined"),
        }
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "mined" | "mine" | "miner" => Ok(Method::Mined),
            other => other
                .parse::<PromptSetting>()
                .map(|p| match p {
                    PromptSetting::Local => Method::Local,
                    PromptSetting::Triples => Method::Triples,
                    PromptSetting::Global => Method::Global,
                })
                .map_err(|_| format!("unknown setting {other:?} (expected local, triples, global or mined)")),
        }
    }
}
