use std::path::PathBuf;

use shexgen_core::{parse_shexc, Schema};

/// `data/` at the workspace root.
pub fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").canonicalize().expect("data directory exists")
}

pub fn fixtures_dir() -> PathBuf {
    data_dir().join("fixtures")
}

/// Bundled ground-truth schema files as `(file stem, text)`, sorted by name.
pub fn fixture_texts() -> Vec<(String, String)> {
    let mut out: Vec<(String, String)> = std::fs::read_dir(fixtures_dir().join("schemas"))
        .expect("fixture schemas directory")
        .filter_map(Result::ok)
        .map(|e| e.path())
        .filter(|p| p.extension().is_some_and(|x| x == "shex"))
        .map(|p| {
            let stem = p.file_stem().unwrap().to_string_lossy().into_owned();
            (stem, std::fs::read_to_string(&p).expect("readable fixture"))
        })
        .collect();
    out.sort();
    out
}

pub fn fixture_schemas() -> Vec<(String, Schema)> {
    fixture_texts()
        .into_iter()
        .map(|(name, text)| {
            let schema = parse_shexc(&text).unwrap_or_else(|e| panic!("fixture {name} does not parse:\n{e}"));
            (name, schema)
        })
        .collect()
}

pub fn fixture_schema(name: &str) -> Schema {
    fixture_schemas()
        .into_iter()
        .find(|(n, _)| n == name)
        .unwrap_or_else(|| panic!("no fixture named {name}"))
        .1
}
