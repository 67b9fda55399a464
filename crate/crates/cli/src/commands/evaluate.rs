use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use shexgen_core::metrics::{ged, nged};
use shexgen_core::{
    categorize_errors, evaluate_pair, macro_average, parse_shexc, DatatypeMapping, ErrorBreakdown, EvalError, EvalReport, Iri,
    MatchContext, MatchCriteria, NodeMode, Schema,
};
use shexgen_kg::KgSubclassOracle;

use super::generate::RunInfo;
use crate::error::CliError;
use crate::manifest::{Manifest, ManifestEntry};
use crate::outcome::Outcome;
use crate::runtime::Runtime;

#[derive(Debug, Clone)]
pub struct EvaluateOptions {
    pub criteria: Vec<MatchCriteria>,
    pub value_type_fallback: bool,
    pub timings: bool,
    /// Overrides for the labels otherwise read from the generated `run.json`.
    pub setting: Option<String>,
    pub model: Option<String>,
}

impl Default for EvaluateOptions {
    fn default() -> Self {
        EvaluateOptions { criteria: MatchCriteria::all().to_vec(), value_type_fallback: false, timings: false, setting: None, model: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum RecordStatus {
    Ok,
    /// No schema was generated; scored as an empty schema.
    Missing,
    /// The generated file does not parse; excluded from averages.
    Invalid,
    /// Scoring failed, e.g. the subclass oracle was unreachable.
    Error,
}

impl RecordStatus {
    pub fn is_scored(self) -> bool {
        matches!(self, RecordStatus::Ok | RecordStatus::Missing)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub class_uri: Iri,
    pub label: String,
    pub setting: String,
    pub model: String,
    pub status: RecordStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    pub reports: Vec<EvalReport>,
    pub ged: Option<u64>,
    pub nged: Option<f64>,
    pub error_breakdown: Option<ErrorBreakdown>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timings_ms: Option<BTreeMap<String, f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriteriaAggregate {
    pub criteria: MatchCriteria,
    pub n: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub setting: String,
    pub model: String,
    /// Schemas contributing to the averages.
    pub n: usize,
    pub n_missing: usize,
    pub n_invalid: usize,
    pub n_error: usize,
    pub criteria: Vec<CriteriaAggregate>,
    pub mean_ged: Option<f64>,
    pub mean_nged: Option<f64>,
    pub error_breakdown: ErrorBreakdown,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub records: Vec<ResultRecord>,
    pub aggregate: Aggregate,
    /// Labels of classes whose generated file was INVALID.
    pub invalid: Vec<String>,
}

fn needs_oracle(criteria: &[MatchCriteria]) -> bool {
    criteria.iter().any(|c| c.node == NodeMode::Subclass)
}

fn ms(t: Instant) -> f64 {
    (t.elapsed().as_secs_f64() * 1e6).round() / 1e3
}

/// Scores one generated schema against its ground truth.
pub fn score(gen: &Schema, gt: &Schema, criteria: &[MatchCriteria], ctx: &MatchContext<'_>) -> Result<(Vec<EvalReport>, u64, f64, ErrorBreakdown), EvalError> {
    let reports = criteria.iter().map(|c| evaluate_pair(gen, gt, *c, ctx)).collect::<Result<Vec<_>, _>>()?;
    let g = ged(gen, gt).map_err(|e| EvalError::Oracle(e.to_string()))?;
    let n = nged(gen, gt).map_err(|e| EvalError::Oracle(e.to_string()))?;
    Ok((reports, g, n, categorize_errors(gen, gt)))
}

fn evaluate_entry(
    manifest: &Manifest,
    entry: &ManifestEntry,
    dir: &Path,
    opts: &EvaluateOptions,
    setting: &str,
    model: &str,
    rt: &Runtime,
) -> (ResultRecord, Option<CliError>) {
    let started = Instant::now();
    let mut record = ResultRecord {
        class_uri: entry.class_uri.clone(),
        label: entry.label.clone(),
        setting: setting.to_owned(),
        model: model.to_owned(),
        status: RecordStatus::Ok,
        message: None,
        reports: Vec::new(),
        ged: None,
        nged: None,
        error_breakdown: None,
        timings_ms: None,
    };
    let fail = |mut record: ResultRecord, status: RecordStatus, e: CliError| {
        record.status = status;
        record.message = Some(e.to_string());
        (record, Some(e))
    };
    let gt = match manifest.ground_truth(entry) {
        Ok(s) => s,
        Err(e) => return fail(record, RecordStatus::Error, e),
    };
    let path = dir.join(format!("{}.shex", entry.slug()));
    let gen = match fs::read_to_string(&path) {
        Ok(text) => match parse_shexc(&text) {
            Ok(s) => s.with_focus_class(entry.class_uri.clone()),
            Err(e) => {
                record.status = RecordStatus::Invalid;
                record.message = Some(e.to_string());
                return (record, None);
            }
        },
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
            record.status = RecordStatus::Missing;
            Schema::empty(entry.class_uri.clone())
        }
        Err(e) => return fail(record, RecordStatus::Error, e.into()),
    };
    let loaded = ms(started);
    let mapping = DatatypeMapping::default();
    let oracle = if needs_oracle(&opts.criteria) {
        match rt.client(entry) {
            Ok(c) => Some(KgSubclassOracle::new(c)),
            Err(e) => return fail(record, RecordStatus::Error, e),
        }
    } else {
        None
    };
    let mut ctx = MatchContext::new(&mapping).with_value_type_fallback(opts.value_type_fallback);
    if let Some(o) = &oracle {
        ctx = ctx.with_oracle(o);
    }
    match score(&gen, &gt, &opts.criteria, &ctx) {
        Ok((reports, g, n, breakdown)) => {
            record.reports = reports;
            record.ged = Some(g);
            record.nged = Some(n);
            record.error_breakdown = Some(breakdown);
        }
        Err(e) => {
            let err = if rt.offline { CliError::CacheMiss(e.to_string()) } else { CliError::Network(e.to_string()) };
            return fail(record, RecordStatus::Error, err);
        }
    }
    if opts.timings {
        record.timings_ms = Some(BTreeMap::from([("load".to_owned(), loaded), ("total".to_owned(), ms(started))]));
    }
    (record, None)
}

pub fn aggregate(records: &[ResultRecord], criteria: &[MatchCriteria], setting: &str, model: &str) -> Aggregate {
    let scored: Vec<&ResultRecord> = records.iter().filter(|r| r.status.is_scored()).collect();
    let count = |s: RecordStatus| records.iter().filter(|r| r.status == s).count();
    let criteria = criteria
        .iter()
        .filter_map(|c| {
            let reports: Vec<EvalReport> = scored.iter().filter_map(|r| r.reports.iter().find(|x| x.criteria == *c).cloned()).collect();
            macro_average(&reports).ok().map(|m| CriteriaAggregate { criteria: *c, n: m.n, precision: m.precision, recall: m.recall, f1: m.f1 })
        })
        .collect();
    let mean = |f: &dyn Fn(&ResultRecord) -> Option<f64>| {
        let v: Vec<f64> = scored.iter().filter_map(|r| f(r)).collect();
        (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
    };
    let mut breakdown = ErrorBreakdown::default();
    for r in &scored {
        if let Some(b) = &r.error_breakdown {
            breakdown.add(b);
        }
    }
    Aggregate {
        setting: setting.to_owned(),
        model: model.to_owned(),
        n: scored.len(),
        n_missing: count(RecordStatus::Missing),
        n_invalid: count(RecordStatus::Invalid),
        n_error: count(RecordStatus::Error),
        criteria,
        mean_ged: mean(&|r| r.ged.map(|g| g as f64)),
        mean_nged: mean(&|r| r.nged),
        error_breakdown: breakdown,
    }
}

/// Scores `<slug>.shex` in `generated_dir` against each class's ground truth.
/// Missing files score as empty schemas; unparseable ones are flagged
/// INVALID and left out of the averages.
pub fn cmd_evaluate(
    manifest: &Manifest,
    selectors: &[String],
    generated_dir: &Path,
    opts: &EvaluateOptions,
    rt: &Runtime,
) -> Result<Outcome<Evaluation>, CliError> {
    if opts.criteria.is_empty() {
        return Err(CliError::Config("no matching criteria given".into()));
    }
    if !generated_dir.is_dir() {
        return Err(CliError::Config(format!("{} is not a directory", generated_dir.display())));
    }
    let entries = manifest.select(selectors)?;
    let run = RunInfo::load(generated_dir);
    let setting = opts.setting.clone().or_else(|| run.as_ref().map(|r| r.setting.clone())).unwrap_or_else(|| "unknown".into());
    let model = opts.model.clone().or_else(|| run.as_ref().map(|r| r.model.clone())).unwrap_or_else(|| "unknown".into());
    let results = rt.map(&entries, |entry| {
        log::info!("evaluate {}", entry.label);
        evaluate_entry(manifest, entry, generated_dir, opts, &setting, &model, rt)
    });
    let mut records = Vec::new();
    let mut failures = Vec::new();
    for (record, err) in results {
        if let Some(e) = err {
            log::error!("evaluate {}: {e}", record.label);
            failures.push((record.label.clone(), e));
        }
        records.push(record);
    }
    let invalid = records.iter().filter(|r| r.status == RecordStatus::Invalid).map(|r| r.label.clone()).collect();
    let aggregate = aggregate(&records, &opts.criteria, &setting, &model);
    Ok(Outcome { value: Evaluation { records, aggregate, invalid }, total: entries.len(), failures })
}
