//! Schema model, ShExC I/O, tree-edit similarity and constraint matching.

pub mod error;
pub mod eval;
pub mod metrics;
pub mod model;
pub mod shexc;
pub mod vocab;

pub use error::{EvalError, MetricsError, ModelError};
pub use eval::{
    categorize_errors, cardinality_loosened, constraint_matches, evaluate_pair, macro_average, CardinalityMode,
    ErrorBreakdown, EvalReport, MatchContext, MatchCriteria, NodeMode, StaticOracle, SubclassOracle,
};
pub use metrics::{nged, schema_to_tree, tree_edit_distance, EditCostModel, SchemaTree};
pub use model::{
    canonicalize, class_set_label, classes_of, datatype_category, Cardinality, DatatypeCategory, DatatypeMapping, Iri, Literal, Max,
    NodeConstraint, PrefixMap, Schema, Shape, ShapeLabel, TripleConstraint, ValueSetItem,
};
pub use shexc::{parse_shexc, serialize_shexc, to_canonical_json, ParseDiagnostic, ParseError};
