use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use shexgen_core::{Cardinality, DatatypeCategory, DatatypeMapping, Iri, Max};
use shexgen_kg::GlobalPredicateRecord;

use super::MlError;

pub const FEATURE_NAMES: [&str; 12] = [
    "frequency",
    "missing_fraction",
    "exactly_one_fraction",
    "multi_fraction",
    "max_observed_count",
    "mean_count",
    "distinct_object_ratio",
    "dt_datetime",
    "dt_decimal",
    "dt_string",
    "dt_iri",
    "has_value_type_constraint",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub frequency: f64,
    pub missing_fraction: f64,
    pub exactly_one_fraction: f64,
    pub multi_fraction: f64,
    pub max_observed_count: u32,
    /// Mean number of objects among instances that use the predicate.
    pub mean_count: f64,
    pub distinct_object_ratio: f64,
    /// One-hot dominant object category, ordered as [`DatatypeCategory::ALL`].
    pub datatype: [bool; 4],
    pub has_value_type_constraint: bool,
}

impl FeatureVector {
    pub fn to_array(&self) -> [f64; 12] {
        let b = |x: bool| if x { 1.0 } else { 0.0 };
        [
            self.frequency,
            self.missing_fraction,
            self.exactly_one_fraction,
            self.multi_fraction,
            f64::from(self.max_observed_count),
            self.mean_count,
            self.distinct_object_ratio,
            b(self.datatype[0]),
            b(self.datatype[1]),
            b(self.datatype[2]),
            b(self.datatype[3]),
            b(self.has_value_type_constraint),
        ]
    }

    pub fn from_array(v: &[f64; 12]) -> Self {
        FeatureVector {
            frequency: v[0],
            missing_fraction: v[1],
            exactly_one_fraction: v[2],
            multi_fraction: v[3],
            max_observed_count: v[4].max(0.0) as u32,
            mean_count: v[5],
            distinct_object_ratio: v[6],
            datatype: [v[7] > 0.5, v[8] > 0.5, v[9] > 0.5, v[10] > 0.5],
            has_value_type_constraint: v[11] > 0.5,
        }
    }
}

fn dominant_category(record: &GlobalPredicateRecord, mapping: &DatatypeMapping) -> Option<DatatypeCategory> {
    let mut mass = [0.0f64; 4];
    for (key, f) in &record.datatype_of_objects {
        let cat = match key.as_str() {
            "IRI" | "bnode" => DatatypeCategory::Iri,
            dt => Iri::new(dt).ok().and_then(|i| mapping.get(&i)).unwrap_or(DatatypeCategory::String),
        };
        mass[cat.index()] += f;
    }
    let (best, m) = mass.iter().enumerate().fold((0, 0.0), |acc, (i, m)| if *m > acc.1 { (i, *m) } else { acc });
    (m > 0.0).then_some(DatatypeCategory::ALL[best])
}

pub fn extract_features(record: &GlobalPredicateRecord) -> Result<FeatureVector, MlError> {
    if !record.is_usable() {
        return Err(MlError::IncompleteRecord(record.predicate_uri.to_string()));
    }
    let mut missing = (1.0 - record.frequency).clamp(0.0, 1.0);
    let mut one = record.cardinality_distribution.get(&1).copied().unwrap_or(0.0);
    let mut multi = record.cardinality_distribution.iter().filter(|(k, _)| **k >= 2).fold(0.0, |a, (_, v)| a + v);
    let total = missing + one + multi;
    if total <= 0.0 {
        (missing, one, multi) = (1.0, 0.0, 0.0);
    } else if (total - 1.0).abs() > 1e-9 {
        (missing, one, multi) = (missing / total, one / total, multi / total);
    }
    let used: f64 = record.cardinality_distribution.values().sum();
    let mean_count = if used > 0.0 {
        record.cardinality_distribution.iter().map(|(k, v)| f64::from(*k) * v).sum::<f64>() / used
    } else {
        0.0
    };
    let mut datatype = [false; 4];
    if let Some(c) = dominant_category(record, &DatatypeMapping::default()) {
        datatype[c.index()] = true;
    }
    Ok(FeatureVector {
        frequency: record.frequency,
        missing_fraction: missing,
        exactly_one_fraction: one,
        multi_fraction: multi,
        max_observed_count: record.cardinality_distribution.keys().next_back().copied().unwrap_or(0),
        mean_count,
        distinct_object_ratio: record.distinct_object_ratio.unwrap_or(0.0),
        datatype,
        has_value_type_constraint: record.value_type_constraint.as_ref().is_some_and(|c| !c.is_empty()),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MaxClass {
    One,
    Unbounded,
}

impl fmt::Display for MaxClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MaxClass::One => "one",
            MaxClass::Unbounded => "unbounded",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CardinalityLabel {
    pub min_class: u8,
    pub max_class: MaxClass,
}

impl CardinalityLabel {
    pub fn new(min_class: u8, max_class: MaxClass) -> Self {
        CardinalityLabel { min_class: min_class.min(1), max_class }
    }

    pub fn to_cardinality(self) -> Cardinality {
        let max = match self.max_class {
            MaxClass::One => Max::Bounded(1),
            MaxClass::Unbounded => Max::Unbounded,
        };
        Cardinality::new(u32::from(self.min_class), max).expect("min is at most 1")
    }
}

impl From<Cardinality> for CardinalityLabel {
    fn from(c: Cardinality) -> Self {
        let max_class = if c.max() == Max::Bounded(1) { MaxClass::One } else { MaxClass::Unbounded };
        CardinalityLabel::new(c.min().min(1) as u8, max_class)
    }
}

/// One labeled row; `class_uri` and `predicate_uri` identify its source.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledRow {
    pub class_uri: String,
    pub predicate_uri: String,
    pub features: FeatureVector,
    pub label: CardinalityLabel,
}

#[derive(Serialize, Deserialize)]
struct CsvRow {
    class_uri: String,
    predicate_uri: String,
    frequency: f64,
    missing_fraction: f64,
    exactly_one_fraction: f64,
    multi_fraction: f64,
    max_observed_count: f64,
    mean_count: f64,
    distinct_object_ratio: f64,
    dt_datetime: f64,
    dt_decimal: f64,
    dt_string: f64,
    dt_iri: f64,
    has_value_type_constraint: f64,
    min_class: u8,
    max_class: MaxClass,
}

/// Header: `class_uri,predicate_uri,<FEATURE_NAMES...>,min_class,max_class`.
pub fn write_feature_csv(path: &Path, rows: &[LabeledRow]) -> Result<(), MlError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| MlError::Io(e.to_string()))?;
    for r in rows {
        let a = r.features.to_array();
        w.serialize(CsvRow {
            class_uri: r.class_uri.clone(),
            predicate_uri: r.predicate_uri.clone(),
            frequency: a[0],
            missing_fraction: a[1],
            exactly_one_fraction: a[2],
            multi_fraction: a[3],
            max_observed_count: a[4],
            mean_count: a[5],
            distinct_object_ratio: a[6],
            dt_datetime: a[7],
            dt_decimal: a[8],
            dt_string: a[9],
            dt_iri: a[10],
            has_value_type_constraint: a[11],
            min_class: r.label.min_class,
            max_class: r.label.max_class,
        })
        .map_err(|e| MlError::Io(e.to_string()))?;
    }
    w.flush().map_err(|e| MlError::Io(e.to_string()))
}

pub fn read_feature_csv(path: &Path) -> Result<Vec<LabeledRow>, MlError> {
    let mut r = csv::Reader::from_path(path).map_err(|e| MlError::Io(e.to_string()))?;
    let mut out = Vec::new();
    for row in r.deserialize::<CsvRow>() {
        let c = row.map_err(|e| MlError::Io(e.to_string()))?;
        let a = [
            c.frequency,
            c.missing_fraction,
            c.exactly_one_fraction,
            c.multi_fraction,
            c.max_observed_count,
            c.mean_count,
            c.distinct_object_ratio,
            c.dt_datetime,
            c.dt_decimal,
            c.dt_string,
            c.dt_iri,
            c.has_value_type_constraint,
        ];
        out.push(LabeledRow {
            class_uri: c.class_uri,
            predicate_uri: c.predicate_uri,
            features: FeatureVector::from_array(&a),
            label: CardinalityLabel::new(c.min_class, c.max_class),
        });
    }
    Ok(out)
}
