//! Supervised cardinality prediction from KG statistics.

mod boost;
mod features;
mod tree;

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use shexgen_core::Cardinality;

pub use boost::{BoostParams, BoostedModel, ScaledTree};
pub use features::{
    extract_features, read_feature_csv, write_feature_csv, CardinalityLabel, FeatureVector, LabeledRow, MaxClass,
    FEATURE_NAMES,
};
pub use tree::{fit_classifier, fit_regressor, Node, TreeParams};

pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MlError {
    #[error("record for {0} lacks frequency or cardinality statistics")]
    IncompleteRecord(String),
    #[error("empty training set")]
    EmptyDataset,
    #[error("{0}")]
    Io(String),
    #[error("invalid model file: {0}")]
    Format(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Dt,
    Gb,
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::Dt => "dt",
            ModelKind::Gb => "gb",
        })
    }
}

impl FromStr for ModelKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "dt" | "tree" | "decision-tree" => Ok(ModelKind::Dt),
            "gb" | "boost" | "gradient-boosting" => Ok(ModelKind::Gb),
            other => Err(format!("unknown model kind {other:?} (expected dt or gb)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct TrainParams {
    pub tree: TreeParams,
    pub boost: BoostParams,
}

/// A binary classifier over the feature array.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase")]
pub enum Classifier {
    Constant { positive: bool },
    Tree { root: Node },
    Boosted(BoostedModel),
}

impl Classifier {
    pub fn fit(kind: ModelKind, x: &[Vec<f64>], y: &[bool], params: &TrainParams, seed: u64) -> Classifier {
        if y.iter().all(|&v| v == y[0]) {
            return Classifier::Constant { positive: y[0] };
        }
        match kind {
            ModelKind::Dt => Classifier::Tree { root: fit_classifier(x, y, &params.tree) },
            ModelKind::Gb => Classifier::Boosted(BoostedModel::fit(x, y, &params.boost, seed)),
        }
    }

    pub fn probability(&self, x: &[f64]) -> f64 {
        match self {
            Classifier::Constant { positive } => f64::from(u8::from(*positive)),
            Classifier::Tree { root } => root.eval(x),
            Classifier::Boosted(m) => m.probability(x),
        }
    }

    pub fn predict(&self, x: &[f64]) -> bool {
        self.probability(x) > 0.5
    }
}

/// Two classifiers: `min` predicts a minimum of 1 (else 0), `max` predicts
/// an unbounded maximum (else 1).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CardinalityModel {
    pub kind: ModelKind,
    pub seed: u64,
    pub params: TrainParams,
    pub feature_names: Vec<String>,
    pub min: Classifier,
    pub max: Classifier,
}

fn matrix(rows: &[LabeledRow]) -> Vec<Vec<f64>> {
    rows.iter().map(|r| r.features.to_array().to_vec()).collect()
}

pub fn train(kind: ModelKind, rows: &[LabeledRow], params: &TrainParams, seed: u64) -> Result<CardinalityModel, MlError> {
    if rows.is_empty() {
        return Err(MlError::EmptyDataset);
    }
    let x = matrix(rows);
    let y_min: Vec<bool> = rows.iter().map(|r| r.label.min_class == 1).collect();
    let y_max: Vec<bool> = rows.iter().map(|r| r.label.max_class == MaxClass::Unbounded).collect();
    for (name, y) in [("min", &y_min), ("max", &y_max)] {
        if y.iter().all(|&v| v == y[0]) {
            log::warn!("{name} target has a single class; using a constant predictor");
        }
    }
    Ok(CardinalityModel {
        kind,
        seed,
        params: *params,
        feature_names: FEATURE_NAMES.iter().map(|s| (*s).to_owned()).collect(),
        min: Classifier::fit(kind, &x, &y_min, params, seed),
        max: Classifier::fit(kind, &x, &y_max, params, seed.wrapping_add(1)),
    })
}

impl CardinalityModel {
    pub fn predict_label(&self, features: &FeatureVector) -> CardinalityLabel {
        let x = features.to_array();
        let max_class = if self.max.predict(&x) { MaxClass::Unbounded } else { MaxClass::One };
        CardinalityLabel::new(u8::from(self.min.predict(&x)), max_class)
    }

    pub fn predict(&self, features: &FeatureVector) -> Cardinality {
        self.predict_label(features).to_cardinality()
    }

    pub fn save(&self, path: &Path) -> Result<(), MlError> {
        let text = serde_json::to_string_pretty(self).map_err(|e| MlError::Format(e.to_string()))?;
        std::fs::write(path, text).map_err(|e| MlError::Io(format!("{}: {e}", path.display())))
    }

    pub fn load(path: &Path) -> Result<CardinalityModel, MlError> {
        let text = std::fs::read_to_string(path).map_err(|e| MlError::Io(format!("{}: {e}", path.display())))?;
        let model: CardinalityModel = serde_json::from_str(&text).map_err(|e| MlError::Format(e.to_string()))?;
        if model.feature_names != FEATURE_NAMES {
            return Err(MlError::Format("feature names do not match this build".into()));
        }
        Ok(model)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Accuracy {
    pub acc_min: f64,
    pub acc_max: f64,
    pub acc_combined: f64,
    pub n: usize,
}

pub fn evaluate_cardinality_accuracy(model: &CardinalityModel, rows: &[LabeledRow]) -> Accuracy {
    let (mut hit_min, mut hit_max, mut hit_both) = (0usize, 0usize, 0usize);
    for r in rows {
        let p = model.predict_label(&r.features);
        let a = p.min_class == r.label.min_class;
        let b = p.max_class == r.label.max_class;
        hit_min += usize::from(a);
        hit_max += usize::from(b);
        hit_both += usize::from(a && b);
    }
    let n = rows.len();
    let share = |k: usize| if n == 0 { 0.0 } else { k as f64 / n as f64 };
    Accuracy { acc_min: share(hit_min), acc_max: share(hit_max), acc_combined: share(hit_both), n }
}
