use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use shexgen_core::{canonicalize, serialize_shexc, Iri, Schema};
use shexgen_kg::KgKind;
use shexgen_pipeline::{
    build_local_prompt, build_triples_prompt, generate_end_to_end, generate_global, mine_baseline_schema, CardinalitySource,
    Exchange, Exemplars, GenerationError, GlobalOptions, LlmClient, MinerThresholds, DEFAULT_MAX_REPAIRS,
};

use super::extract::{extract_for, ExtractOptions, Extraction};
use super::Method;
use crate::error::CliError;
use crate::manifest::{Manifest, ManifestEntry};
use crate::outcome::{to_json, write_file, Outcome};
use crate::runtime::Runtime;

pub const RUN_FILE: &str = "run.json";

#[derive(Debug, Clone)]
pub struct GenerateOptions {
    pub method: Method,
    pub cardinality: CardinalitySource,
    /// Root holding `<kg>/<kind>.json` few-shot files; none means zero-shot.
    pub exemplars_dir: Option<PathBuf>,
    pub out_dir: PathBuf,
    pub extract: ExtractOptions,
    pub max_repairs: usize,
    pub retries: usize,
    pub thresholds: MinerThresholds,
}

impl GenerateOptions {
    pub fn new(method: Method, out_dir: impl Into<PathBuf>) -> Self {
        GenerateOptions {
            method,
            cardinality: CardinalitySource::Llm,
            exemplars_dir: None,
            out_dir: out_dir.into(),
            extract: ExtractOptions::default(),
            max_repairs: DEFAULT_MAX_REPAIRS,
            retries: shexgen_pipeline::structured::DEFAULT_STRUCTURED_RETRIES,
            thresholds: MinerThresholds::default(),
        }
    }

    /// Setting name recorded with results, e.g. `global` or `global+dt`.
    pub fn setting_label(&self) -> String {
        match (&self.cardinality, self.method) {
            (CardinalitySource::Ml(m), Method::Global) => format!("global+{}", m.kind),
            _ => self.method.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassRun {
    pub class_uri: Iri,
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub skipped: Vec<(Iri, String)>,
    pub exchanges: usize,
}

/// Written next to the schemas as `run.json`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunInfo {
    pub setting: String,
    pub model: String,
    pub classes: Vec<ClassRun>,
}

impl RunInfo {
    pub fn load(dir: &Path) -> Option<RunInfo> {
        let text = fs::read_to_string(dir.join(RUN_FILE)).ok()?;
        serde_json::from_str(&text).ok()
    }
}

struct ClassResult {
    schema: Option<Schema>,
    transcript: Vec<Exchange>,
    skipped: Vec<(Iri, String)>,
    error: Option<CliError>,
}

fn load_exemplars(opts: &GenerateOptions, entries: &[&ManifestEntry]) -> Result<HashMap<KgKind, Exemplars>, CliError> {
    let mut out = HashMap::new();
    for e in entries {
        if out.contains_key(&e.kg_kind) {
            continue;
        }
        let ex = match &opts.exemplars_dir {
            Some(dir) => Exemplars::load(dir, e.kg_kind).map_err(|err| CliError::Config(err.to_string()))?,
            None => Exemplars::default(),
        };
        out.insert(e.kg_kind, ex);
    }
    Ok(out)
}

fn generate_class(entry: &ManifestEntry, opts: &GenerateOptions, exemplars: &Exemplars, llm: &dyn LlmClient, rt: &Runtime) -> ClassResult {
    let failed = |error: CliError, transcript: Vec<Exchange>| ClassResult { schema: None, transcript, skipped: Vec::new(), error: Some(error) };
    let extraction = match rt.client(entry).and_then(|c| Ok(extract_for(&c, &entry.class_uri, opts.method, &opts.extract)?)) {
        Ok(x) => x,
        Err(e) => return failed(e, Vec::new()),
    };
    let class = &entry.class_uri;
    let typing = entry.typing();
    let generated = match (opts.method, &extraction) {
        (Method::Local, Extraction::Local { class: info, samples }) => build_local_prompt(info, samples, &exemplars.local)
            .map_err(GenerationError::from)
            .and_then(|p| generate_end_to_end(&p, class, llm, opts.max_repairs)),
        (Method::Triples, Extraction::Triples { class: info, examples }) => build_triples_prompt(info, examples, &exemplars.triples)
            .map_err(GenerationError::from)
            .and_then(|p| generate_end_to_end(&p, class, llm, opts.max_repairs)),
        (Method::Global, Extraction::Global { records }) => {
            let gopts = GlobalOptions { typing_predicate: typing, retries: opts.retries };
            generate_global(class, records, llm, &opts.cardinality, exemplars, &gopts)
        }
        (Method::Mined, Extraction::Global { records }) => {
            return match mine_baseline_schema(class, records, &opts.thresholds, &typing) {
                Ok(schema) => ClassResult { schema: Some(schema), transcript: Vec::new(), skipped: Vec::new(), error: None },
                Err(e) => failed(CliError::Other(e.to_string()), Vec::new()),
            }
        }
        _ => unreachable!("extraction matches the method"),
    };
    match generated {
        Ok(g) => ClassResult { schema: Some(g.schema), transcript: g.transcript, skipped: g.skipped, error: None },
        Err(e) => {
            let transcript = match &e {
                GenerationError::GenerationFailed { transcript, .. } | GenerationError::StructuredOutputFailed { transcript, .. } => {
                    transcript.clone()
                }
                _ => Vec::new(),
            };
            failed(e.into(), transcript)
        }
    }
}

/// Generates one schema per selected class into `opts.out_dir` as
/// `<slug>.shex`, with `<slug>.transcript.json` for LLM methods and a
/// `run.json` summary. A failed class leaves no schema file.
pub fn cmd_generate(manifest: &Manifest, selectors: &[String], opts: &GenerateOptions, llm: &dyn LlmClient, rt: &Runtime) -> Result<Outcome<RunInfo>, CliError> {
    let entries = manifest.select(selectors)?;
    let exemplars = load_exemplars(opts, &entries)?;
    fs::create_dir_all(&opts.out_dir)?;
    let results = rt.map(&entries, |entry| {
        log::info!("generate {} ({})", entry.label, opts.setting_label());
        let r = generate_class(entry, opts, &exemplars[&entry.kg_kind], llm, rt);
        let slug = entry.slug();
        let shex_path = opts.out_dir.join(format!("{slug}.shex"));
        let mut run = ClassRun {
            class_uri: entry.class_uri.clone(),
            label: entry.label.clone(),
            file: None,
            error: r.error.as_ref().map(|e| e.to_string()),
            skipped: r.skipped.clone(),
            exchanges: r.transcript.len(),
        };
        if opts.method != Method::Mined {
            write_file(&opts.out_dir.join(format!("{slug}.transcript.json")), &to_json(&r.transcript))?;
        }
        let mut error = r.error;
        match r.schema.map(|s| serialize_shexc(&canonicalize(&s))) {
            Some(Ok(text)) => {
                write_file(&shex_path, &text)?;
                run.file = Some(format!("{slug}.shex"));
            }
            Some(Err(e)) => error = Some(CliError::Other(e.to_string())),
            None => {}
        }
        if let Some(e) = &error {
            log::error!("generate {}: {e}", entry.label);
            run.error = Some(e.to_string());
            if shex_path.exists() {
                fs::remove_file(&shex_path)?;
            }
        }
        Ok::<_, CliError>((run, error))
    });
    let mut classes = Vec::new();
    let mut failures = Vec::new();
    for (entry, r) in entries.iter().zip(results) {
        let (run, error) = r?;
        if let Some(e) = error {
            failures.push((entry.label.clone(), e));
        }
        classes.push(run);
    }
    let model = if opts.method == Method::Mined { "miner".to_owned() } else { llm.model_id() };
    let info = RunInfo { setting: opts.setting_label(), model, classes };
    write_file(&opts.out_dir.join(RUN_FILE), &to_json(&info))?;
    Ok(Outcome { value: info, total: entries.len(), failures })
}
