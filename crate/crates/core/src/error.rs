use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("invalid IRI {0:?}")]
    InvalidIri(String),
    #[error("invalid cardinality {{{min},{max}}}: min exceeds max")]
    InvalidCardinality { min: u32, max: u32 },
    #[error("start shape {0} is not declared")]
    MissingStart(String),
    #[error("shape {0} is declared twice")]
    DuplicateShape(String),
    #[error("shape {0} has no constraints")]
    EmptyShape(String),
    #[error("predicate {predicate} appears more than once in shape {shape}")]
    DuplicatePredicate { shape: String, predicate: String },
    #[error("empty value set on {0}")]
    EmptyValueSet(String),
    #[error("duplicate value in value set on {0}")]
    DuplicateValue(String),
    #[error("reference to undeclared shape {0}")]
    DanglingShapeRef(String),
    #[error("datatype {0} has no category in the mapping")]
    UnmappedDatatype(String),
    #[error("value set mixes datatype categories")]
    MixedValueSet,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricsError {
    #[error("ground-truth schema has no constraints")]
    EmptyGroundTruth,
    #[error("no schema pairs to aggregate")]
    EmptyDataset,
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("SUBCLASS matching requested without a subclass oracle")]
    OracleUnavailable,
    #[error("subclass oracle failed: {0}")]
    Oracle(String),
    #[error("no reports to average")]
    EmptyDataset,
    #[error(transparent)]
    Model(#[from] ModelError),
}
