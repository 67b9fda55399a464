use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use shexgen_pipeline::extract::global_records;
use shexgen_pipeline::ml::{extract_features, read_feature_csv, write_feature_csv, CardinalityLabel, LabeledRow, MlError};
use shexgen_pipeline::{evaluate_cardinality_accuracy, train, Accuracy, ModelKind, TrainParams};

use crate::error::CliError;
use crate::manifest::Manifest;
use crate::outcome::Outcome;
use crate::runtime::Runtime;

/// Labeled rows for every ground-truth constraint whose predicate has a
/// usable record, in manifest then record order.
pub fn collect_rows(manifest: &Manifest, selectors: &[String], rt: &Runtime, max_predicates: usize) -> Result<Outcome<Vec<LabeledRow>>, CliError> {
    let entries = manifest.select(selectors)?;
    let results = rt.map(&entries, |entry| -> Result<Vec<LabeledRow>, CliError> {
        let gt = manifest.ground_truth(entry)?;
        let client = rt.client(entry)?;
        let typing = entry.typing();
        let mut rows = Vec::new();
        for record in global_records(&client, &entry.class_uri, max_predicates)? {
            if record.predicate_uri == typing {
                continue;
            }
            let Some(tc) = gt.start_shape().constraint(&record.predicate_uri) else { continue };
            match extract_features(&record) {
                Ok(features) => rows.push(LabeledRow {
                    class_uri: entry.class_uri.to_string(),
                    predicate_uri: record.predicate_uri.to_string(),
                    features,
                    label: CardinalityLabel::from(tc.cardinality),
                }),
                Err(MlError::IncompleteRecord(p)) => log::warn!("{}: skipping {p}: incomplete record", entry.label),
                Err(e) => return Err(CliError::Other(e.to_string())),
            }
        }
        Ok(rows)
    });
    let mut all = Vec::new();
    let mut failures = Vec::new();
    for (entry, r) in entries.iter().zip(results) {
        match r {
            Ok(rows) => all.extend(rows),
            Err(e) => {
                log::error!("train {}: {e}", entry.label);
                failures.push((entry.label.clone(), e));
            }
        }
    }
    Ok(Outcome { value: all, total: entries.len(), failures })
}

fn fnv(s: &str) -> u64 {
    s.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3))
}

/// Deterministic split on a hash of (class, predicate): a row goes to the
/// held-out part with probability `fraction`.
pub fn split_rows(rows: &[LabeledRow], fraction: f64, seed: u64) -> (Vec<LabeledRow>, Vec<LabeledRow>) {
    rows.iter().cloned().partition(|r| {
        let h = fnv(&format!("{seed}|{}|{}", r.class_uri, r.predicate_uri));
        ((h % 10_000) as f64) >= fraction * 10_000.0
    })
}

#[derive(Debug, Clone)]
pub struct TrainOptions {
    pub kind: ModelKind,
    pub seed: u64,
    pub params: TrainParams,
    pub model_file: PathBuf,
    pub features_in: Option<PathBuf>,
    pub features_out: Option<PathBuf>,
    pub holdout: f64,
    pub max_predicates: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainSummary {
    pub kind: ModelKind,
    pub seed: u64,
    pub train_rows: usize,
    pub test_rows: usize,
    pub train_accuracy: Accuracy,
    pub test_accuracy: Option<Accuracy>,
}

fn ml(e: MlError) -> CliError {
    CliError::Other(e.to_string())
}

pub fn train_from_rows(rows: &[LabeledRow], opts: &TrainOptions) -> Result<TrainSummary, CliError> {
    if !(0.0..1.0).contains(&opts.holdout) {
        return Err(CliError::Config("--holdout must be in [0, 1)".into()));
    }
    let (train_rows, test_rows) = split_rows(rows, opts.holdout, opts.seed);
    let model = train(opts.kind, &train_rows, &opts.params, opts.seed).map_err(ml)?;
    model.save(&opts.model_file).map_err(ml)?;
    Ok(TrainSummary {
        kind: opts.kind,
        seed: opts.seed,
        train_rows: train_rows.len(),
        test_rows: test_rows.len(),
        train_accuracy: evaluate_cardinality_accuracy(&model, &train_rows),
        test_accuracy: (!test_rows.is_empty()).then(|| evaluate_cardinality_accuracy(&model, &test_rows)),
    })
}

/// Trains from a feature CSV or, without one, from rows built from the
/// manifest's ground truth and cached KG statistics.
pub fn cmd_train(manifest: Option<&Manifest>, selectors: &[String], opts: &TrainOptions, rt: &Runtime) -> Result<Outcome<TrainSummary>, CliError> {
    let (rows, total, failures) = match (&opts.features_in, manifest) {
        (Some(path), _) => (read_feature_csv(path).map_err(ml)?, 1, Vec::new()),
        (None, Some(m)) => {
            let o = collect_rows(m, selectors, rt, opts.max_predicates)?;
            (o.value, o.total, o.failures)
        }
        (None, None) => return Err(CliError::Config("train needs --manifest or --features-in".into())),
    };
    if let Some(path) = &opts.features_out {
        write_feature_csv(path, &rows).map_err(ml)?;
    }
    let summary = train_from_rows(&rows, opts)?;
    Ok(Outcome { value: summary, total, failures })
}
