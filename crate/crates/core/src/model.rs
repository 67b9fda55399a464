//! Object model for the ShEx subset: schemas made of shapes, shapes made of
//! predicate-keyed triple constraints.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::ModelError;
use crate::vocab;

/// An IRI in expanded form.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Iri(String);

impl Iri {
    pub fn new(value: impl Into<String>) -> Result<Self, ModelError> {
        let value = value.into();
        if value.is_empty() || value.chars().any(char::is_whitespace) {
            return Err(ModelError::InvalidIri(value));
        }
        Ok(Iri(value))
    }

    /// Constructs an IRI from a compile-time constant. Panics on invalid input.
    pub fn from_static(value: &'static str) -> Self {
        Iri::new(value).expect("static IRI must be valid")
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// The segment after the last `/`, `#` or `:`.
    pub fn local_name(&self) -> &str {
        let idx = self.0.rfind(['/', '#', ':']).map(|i| i + 1).unwrap_or(0);
        if idx >= self.0.len() {
            &self.0
        } else {
            &self.0[idx..]
        }
    }
}

impl fmt::Display for Iri {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl TryFrom<String> for Iri {
    type Error = ModelError;
    fn try_from(value: String) -> Result<Self, Self::Error> {
        Iri::new(value)
    }
}

impl From<Iri> for String {
    fn from(iri: Iri) -> String {
        iri.0
    }
}

impl AsRef<str> for Iri {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

/// Upper occurrence bound of a triple constraint.
/// Serialized as an integer, or `null` when unbounded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "Option<u32>", into = "Option<u32>")]
pub enum Max {
    Bounded(u32),
    Unbounded,
}

impl From<Option<u32>> for Max {
    fn from(m: Option<u32>) -> Self {
        m.map_or(Max::Unbounded, Max::Bounded)
    }
}

impl From<Max> for Option<u32> {
    fn from(m: Max) -> Self {
        m.as_option()
    }
}

impl Max {
    pub fn as_option(self) -> Option<u32> {
        match self {
            Max::Bounded(m) => Some(m),
            Max::Unbounded => None,
        }
    }
}

/// Occurrence range `{min, max}` of a predicate per focus node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "CardinalityRepr", into = "CardinalityRepr")]
pub struct Cardinality {
    min: u32,
    max: Max,
}

impl Cardinality {
    pub const ONE: Cardinality = Cardinality { min: 1, max: Max::Bounded(1) };
    pub const OPTIONAL: Cardinality = Cardinality { min: 0, max: Max::Bounded(1) };
    pub const STAR: Cardinality = Cardinality { min: 0, max: Max::Unbounded };
    pub const PLUS: Cardinality = Cardinality { min: 1, max: Max::Unbounded };

    pub fn new(min: u32, max: Max) -> Result<Self, ModelError> {
        if let Max::Bounded(m) = max {
            if min > m {
                return Err(ModelError::InvalidCardinality { min, max: m });
            }
        }
        Ok(Cardinality { min, max })
    }

    pub fn bounded(min: u32, max: u32) -> Result<Self, ModelError> {
        Cardinality::new(min, Max::Bounded(max))
    }

    pub fn at_least(min: u32) -> Self {
        Cardinality { min, max: Max::Unbounded }
    }

    pub fn min(&self) -> u32 {
        self.min
    }

    pub fn max(&self) -> Max {
        self.max
    }

    /// True when `self` (as an interval) contains `other`.
    pub fn contains(&self, other: &Cardinality) -> bool {
        let upper_ok = match (self.max, other.max) {
            (Max::Unbounded, _) => true,
            (Max::Bounded(_), Max::Unbounded) => false,
            (Max::Bounded(a), Max::Bounded(b)) => b <= a,
        };
        self.min <= other.min && upper_ok
    }

    /// Label used in schema trees: `{min,max}` with `*` for unbounded.
    pub fn tree_label(&self) -> String {
        match self.max {
            Max::Bounded(m) => format!("{{{},{}}}", self.min, m),
            Max::Unbounded => format!("{{{},*}}", self.min),
        }
    }
}

/// Serialized form: `max` is `null` when unbounded.
#[derive(Serialize, Deserialize)]
struct CardinalityRepr {
    min: u32,
    max: Option<u32>,
}

impl From<Cardinality> for CardinalityRepr {
    fn from(c: Cardinality) -> Self {
        CardinalityRepr { min: c.min, max: c.max.as_option() }
    }
}

impl TryFrom<CardinalityRepr> for Cardinality {
    type Error = ModelError;
    fn try_from(r: CardinalityRepr) -> Result<Self, Self::Error> {
        Cardinality::new(r.min, r.max.map_or(Max::Unbounded, Max::Bounded))
    }
}

impl Default for Cardinality {
    fn default() -> Self {
        Cardinality::ONE
    }
}

impl fmt::Display for Cardinality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.tree_label())
    }
}

/// A literal inside a value set, kept verbatim.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Literal {
    pub lexical: String,
    pub datatype: Option<Iri>,
    pub language: Option<String>,
}

impl Literal {
    pub fn string(lexical: impl Into<String>) -> Self {
        Literal { lexical: lexical.into(), datatype: None, language: None }
    }

    pub fn typed(lexical: impl Into<String>, datatype: Iri) -> Self {
        Literal { lexical: lexical.into(), datatype: Some(datatype), language: None }
    }

    /// The effective datatype: explicit, `rdf:langString` for tagged, else `xsd:string`.
    pub fn effective_datatype(&self) -> Iri {
        match (&self.datatype, &self.language) {
            (Some(dt), _) => dt.clone(),
            (None, Some(_)) => Iri::from_static(vocab::RDF_LANG_STRING),
            (None, None) => Iri::from_static(vocab::XSD_STRING),
        }
    }
}

/// Member of a value set.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ValueSetItem {
    Iri(Iri),
    Literal(Literal),
}

impl ValueSetItem {
    pub fn as_iri(&self) -> Option<&Iri> {
        match self {
            ValueSetItem::Iri(iri) => Some(iri),
            ValueSetItem::Literal(_) => None,
        }
    }

    fn canonical_string(&self) -> String {
        match self {
            ValueSetItem::Iri(iri) => iri.as_str().to_owned(),
            ValueSetItem::Literal(lit) => {
                let mut s = format!("{:?}", lit.lexical);
                if let Some(lang) = &lit.language {
                    s.push('@');
                    s.push_str(lang);
                } else if let Some(dt) = &lit.datatype {
                    s.push_str("^^");
                    s.push_str(dt.as_str());
                }
                s
            }
        }
    }
}

/// Label of a shape declaration.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ShapeLabel(String);

impl ShapeLabel {
    pub fn new(label: impl Into<String>) -> Self {
        ShapeLabel(label.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ShapeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&Iri> for ShapeLabel {
    fn from(iri: &Iri) -> Self {
        ShapeLabel(iri.as_str().to_owned())
    }
}

/// Restriction on the object of a triple constraint.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NodeConstraint {
    NodeKindIri,
    Datatype(Iri),
    ValueSet(Vec<ValueSetItem>),
    ShapeRef(ShapeLabel),
}

impl NodeConstraint {
    pub fn kind_name(&self) -> &'static str {
        match self {
            NodeConstraint::NodeKindIri => "node-kind",
            NodeConstraint::Datatype(_) => "datatype",
            NodeConstraint::ValueSet(_) => "value-set",
            NodeConstraint::ShapeRef(_) => "shape-ref",
        }
    }
}

/// One `predicate nodeConstraint cardinality` entry of a shape.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TripleConstraint {
    pub predicate: Iri,
    pub node: NodeConstraint,
    pub cardinality: Cardinality,
}

impl TripleConstraint {
    pub fn new(predicate: Iri, node: NodeConstraint, cardinality: Cardinality) -> Self {
        TripleConstraint { predicate, node, cardinality }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Shape {
    pub label: ShapeLabel,
    pub extra: BTreeSet<Iri>,
    pub constraints: Vec<TripleConstraint>,
}

impl Shape {
    pub fn new(label: ShapeLabel) -> Self {
        Shape { label, extra: BTreeSet::new(), constraints: Vec::new() }
    }

    pub fn constraint(&self, predicate: &Iri) -> Option<&TripleConstraint> {
        self.constraints.iter().find(|c| &c.predicate == predicate)
    }

    /// IRIs listed in the value sets attached to instance-typing predicates.
    pub fn typing_classes(&self) -> BTreeSet<Iri> {
        self.typing_classes_ordered().into_iter().collect()
    }

    /// Like [`Shape::typing_classes`] but in source order, duplicates removed.
    pub fn typing_classes_ordered(&self) -> Vec<Iri> {
        let mut out: Vec<Iri> = Vec::new();
        for c in &self.constraints {
            if !vocab::is_typing_predicate(c.predicate.as_str()) {
                continue;
            }
            if let NodeConstraint::ValueSet(values) = &c.node {
                for iri in values.iter().filter_map(ValueSetItem::as_iri) {
                    if !out.contains(iri) {
                        out.push(iri.clone());
                    }
                }
            }
        }
        out
    }
}

/// Prefix declarations in declaration order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrefixMap {
    entries: Vec<(String, Iri)>,
}

impl PrefixMap {
    pub fn new() -> Self {
        PrefixMap::default()
    }

    /// Prefixes used by the two supported knowledge graphs plus XSD/RDF/RDFS.
    pub fn well_known() -> Self {
        let mut map = PrefixMap::new();
        for (p, ns) in vocab::WELL_KNOWN_PREFIXES {
            map.insert(p, Iri::from_static(ns));
        }
        map
    }

    /// Inserts or replaces a prefix binding.
    pub fn insert(&mut self, prefix: &str, namespace: Iri) {
        if let Some(entry) = self.entries.iter_mut().find(|(p, _)| p == prefix) {
            entry.1 = namespace;
        } else {
            self.entries.push((prefix.to_owned(), namespace));
        }
    }

    pub fn get(&self, prefix: &str) -> Option<&Iri> {
        self.entries.iter().find(|(p, _)| p == prefix).map(|(_, ns)| ns)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Iri)> {
        self.entries.iter().map(|(p, ns)| (p.as_str(), ns))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn expand(&self, prefix: &str, local: &str) -> Option<Iri> {
        self.get(prefix).and_then(|ns| Iri::new(format!("{}{}", ns.as_str(), local)).ok())
    }

    /// Compacts to `prefix:local` using the longest matching namespace whose
    /// remainder is a safe local name. Ties on namespace length go to the
    /// lexicographically smallest prefix.
    pub fn compact(&self, iri: &str) -> Option<String> {
        self.compact_with(iri).map(|(p, local)| format!("{p}:{local}"))
    }

    fn compact_with<'a>(&'a self, iri: &'a str) -> Option<(&'a str, &'a str)> {
        let mut best: Option<(&str, &str, usize)> = None;
        for (prefix, ns) in &self.entries {
            let Some(local) = iri.strip_prefix(ns.as_str()) else { continue };
            if !is_safe_local_name(local) {
                continue;
            }
            let len = ns.as_str().len();
            let better = match best {
                None => true,
                Some((bp, _, blen)) => len > blen || (len == blen && prefix.as_str() < bp),
            };
            if better {
                best = Some((prefix.as_str(), local, len));
            }
        }
        best.map(|(p, l, _)| (p, l))
    }
}

/// Local names we are willing to emit unescaped in `prefix:local` form.
pub fn is_safe_local_name(local: &str) -> bool {
    let bytes = local.as_bytes();
    if bytes.is_empty() {
        return false;
    }
    let ok = |b: u8| b.is_ascii_alphanumeric() || b == b'_' || b == b'-' || b == b'.';
    let first = bytes[0];
    let last = bytes[bytes.len() - 1];
    (first.is_ascii_alphanumeric() || first == b'_')
        && last != b'.'
        && bytes.iter().all(|&b| ok(b))
}

/// A schema with a designated start shape targeting one focus class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schema {
    prefixes: PrefixMap,
    start: ShapeLabel,
    shapes: IndexMap<ShapeLabel, Shape>,
    focus_class: Iri,
}

impl Schema {
    /// Builds a schema and checks every structural invariant.
    pub fn new(
        prefixes: PrefixMap,
        start: ShapeLabel,
        shapes: Vec<Shape>,
        focus_class: Iri,
    ) -> Result<Self, ModelError> {
        let schema = Self::assemble(prefixes, start, shapes, focus_class)?;
        schema.validate()?;
        Ok(schema)
    }

    fn assemble(
        prefixes: PrefixMap,
        start: ShapeLabel,
        shapes: Vec<Shape>,
        focus_class: Iri,
    ) -> Result<Self, ModelError> {
        let mut map = IndexMap::with_capacity(shapes.len());
        for shape in shapes {
            if map.contains_key(&shape.label) {
                return Err(ModelError::DuplicateShape(shape.label.to_string()));
            }
            map.insert(shape.label.clone(), shape);
        }
        Ok(Schema { prefixes, start, shapes: map, focus_class })
    }

    /// A schema whose start shape has no constraints. It exists only as the
    /// "nothing generated" side of an evaluation and cannot be serialized.
    pub fn empty(focus_class: Iri) -> Self {
        let label = ShapeLabel::from(&focus_class);
        let mut shapes = IndexMap::new();
        shapes.insert(label.clone(), Shape::new(label.clone()));
        Schema { prefixes: PrefixMap::new(), start: label, shapes, focus_class }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if !self.shapes.contains_key(&self.start) {
            return Err(ModelError::MissingStart(self.start.to_string()));
        }
        for shape in self.shapes.values() {
            if shape.constraints.is_empty() {
                return Err(ModelError::EmptyShape(shape.label.to_string()));
            }
            let mut seen = BTreeSet::new();
            for c in &shape.constraints {
                if !seen.insert(&c.predicate) {
                    return Err(ModelError::DuplicatePredicate {
                        shape: shape.label.to_string(),
                        predicate: c.predicate.to_string(),
                    });
                }
                match &c.node {
                    NodeConstraint::ValueSet(values) => {
                        if values.is_empty() {
                            return Err(ModelError::EmptyValueSet(c.predicate.to_string()));
                        }
                        let distinct: BTreeSet<_> = values.iter().collect();
                        if distinct.len() != values.len() {
                            return Err(ModelError::DuplicateValue(c.predicate.to_string()));
                        }
                    }
                    NodeConstraint::ShapeRef(label)
                        if !self.shapes.contains_key(label) => {
                            return Err(ModelError::DanglingShapeRef(label.to_string()));
                        }
                    _ => {}
                }
            }
        }
        Ok(())
    }

    pub fn prefixes(&self) -> &PrefixMap {
        &self.prefixes
    }

    pub fn start_label(&self) -> &ShapeLabel {
        &self.start
    }

    pub fn start_shape(&self) -> &Shape {
        &self.shapes[&self.start]
    }

    pub fn shape(&self, label: &ShapeLabel) -> Option<&Shape> {
        self.shapes.get(label)
    }

    pub fn shapes(&self) -> impl Iterator<Item = &Shape> {
        self.shapes.values()
    }

    pub fn shape_count(&self) -> usize {
        self.shapes.len()
    }

    pub fn focus_class(&self) -> &Iri {
        &self.focus_class
    }

    /// Number of triple constraints in the start shape (the `|S|` of NGED).
    pub fn constraint_count(&self) -> usize {
        self.start_shape().constraints.len()
    }

    pub fn with_focus_class(mut self, focus_class: Iri) -> Self {
        self.focus_class = focus_class;
        self
    }

    pub fn with_prefixes(mut self, prefixes: PrefixMap) -> Self {
        self.prefixes = prefixes;
        self
    }

    /// Returns a copy of this schema whose start shape keeps only the
    /// constraints accepted by `keep`. Referenced shapes are untouched.
    pub fn retain_start_constraints(&self, mut keep: impl FnMut(&TripleConstraint) -> bool) -> Schema {
        let mut out = self.clone();
        let start = out.start.clone();
        out.shapes[&start].constraints.retain(|c| keep(c));
        out
    }
}

/// Coarse datatype families used for datatype-compatible matching.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatatypeCategory {
    Datetime,
    Decimal,
    String,
    Iri,
}

impl DatatypeCategory {
    pub const ALL: [DatatypeCategory; 4] = [
        DatatypeCategory::Datetime,
        DatatypeCategory::Decimal,
        DatatypeCategory::String,
        DatatypeCategory::Iri,
    ];

    pub fn index(self) -> usize {
        self as usize
    }
}

/// Datatype IRI to category table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatatypeMapping {
    table: BTreeMap<Iri, DatatypeCategory>,
}

impl Default for DatatypeMapping {
    fn default() -> Self {
        use DatatypeCategory::*;
        let mut table = BTreeMap::new();
        for (iri, cat) in [
            (vocab::XSD_DATETIME, Datetime),
            (vocab::XSD_DATE, Datetime),
            (vocab::XSD_GYEAR, Datetime),
            (vocab::XSD_DECIMAL, Decimal),
            (vocab::XSD_INTEGER, Decimal),
            (vocab::XSD_DOUBLE, Decimal),
            (vocab::XSD_STRING, String),
            (vocab::RDF_LANG_STRING, String),
            (vocab::XSD_ANY_URI, Iri),
        ] {
            table.insert(self::Iri::from_static(iri), cat);
        }
        DatatypeMapping { table }
    }
}

impl DatatypeMapping {
    pub fn empty() -> Self {
        DatatypeMapping { table: BTreeMap::new() }
    }

    pub fn insert(&mut self, datatype: Iri, category: DatatypeCategory) {
        self.table.insert(datatype, category);
    }

    pub fn get(&self, datatype: &Iri) -> Option<DatatypeCategory> {
        self.table.get(datatype).copied()
    }

    pub fn category_of_datatype(&self, datatype: &Iri) -> Result<DatatypeCategory, ModelError> {
        self.get(datatype).ok_or_else(|| ModelError::UnmappedDatatype(datatype.to_string()))
    }

    /// Category of a node constraint. Node kinds, shape references and value
    /// sets of IRIs are IRI-valued; value sets of literals map by datatype.
    pub fn category(&self, nc: &NodeConstraint) -> Result<DatatypeCategory, ModelError> {
        match nc {
            NodeConstraint::NodeKindIri | NodeConstraint::ShapeRef(_) => Ok(DatatypeCategory::Iri),
            NodeConstraint::Datatype(dt) => self.category_of_datatype(dt),
            NodeConstraint::ValueSet(values) => {
                let mut found: Option<DatatypeCategory> = None;
                for v in values {
                    let cat = match v {
                        ValueSetItem::Iri(_) => DatatypeCategory::Iri,
                        ValueSetItem::Literal(lit) => self.category_of_datatype(&lit.effective_datatype())?,
                    };
                    match found {
                        None => found = Some(cat),
                        Some(prev) if prev != cat => {
                            return Err(ModelError::MixedValueSet);
                        }
                        _ => {}
                    }
                }
                found.ok_or(ModelError::MixedValueSet)
            }
        }
    }
}

/// Category of a node constraint under the default mapping.
pub fn datatype_category(
    nc: &NodeConstraint,
    mapping: &DatatypeMapping,
) -> Result<DatatypeCategory, ModelError> {
    mapping.category(nc)
}

/// Classes named by a node constraint: IRIs of a value set, or the typing
/// classes of a referenced shape.
pub fn classes_of(nc: &NodeConstraint, schema: &Schema) -> Result<BTreeSet<Iri>, ModelError> {
    match nc {
        NodeConstraint::ValueSet(values) => {
            Ok(values.iter().filter_map(ValueSetItem::as_iri).cloned().collect())
        }
        NodeConstraint::ShapeRef(label) => schema
            .shape(label)
            .map(Shape::typing_classes)
            .ok_or_else(|| ModelError::DanglingShapeRef(label.to_string())),
        NodeConstraint::NodeKindIri | NodeConstraint::Datatype(_) => Ok(BTreeSet::new()),
    }
}

/// Canonical, schema-independent label for a node constraint. Shape
/// references render as the sorted class set of the target shape.
pub fn node_label(nc: &NodeConstraint, schema: &Schema) -> Result<String, ModelError> {
    Ok(match nc {
        NodeConstraint::NodeKindIri => "IRI".to_owned(),
        NodeConstraint::Datatype(dt) => dt.as_str().to_owned(),
        NodeConstraint::ValueSet(values) => {
            let mut items: Vec<String> = values.iter().map(ValueSetItem::canonical_string).collect();
            items.sort();
            format!("[{}]", items.join(" "))
        }
        NodeConstraint::ShapeRef(label) => {
            let classes = classes_of(nc, schema)?;
            if classes.is_empty() {
                format!("@<{label}>")
            } else {
                let names: Vec<&str> = classes.iter().map(Iri::as_str).collect();
                format!("@[{}]", names.join(" "))
            }
        }
    })
}

/// Rewrites a schema into canonical form: constraints sorted by predicate,
/// value sets sorted, shape labels derived from typing classes, start shape
/// first then the rest by label, and only the prefixes that are used.
pub fn canonicalize(schema: &Schema) -> Schema {
    let renames = canonical_labels(schema);
    let mut shapes: Vec<Shape> = schema
        .shapes()
        .map(|shape| {
            let mut constraints: Vec<TripleConstraint> = shape
                .constraints
                .iter()
                .map(|c| {
                    let node = match &c.node {
                        NodeConstraint::ValueSet(values) => {
                            let mut values = values.clone();
                            values.sort();
                            NodeConstraint::ValueSet(values)
                        }
                        NodeConstraint::ShapeRef(label) => NodeConstraint::ShapeRef(
                            renames.get(label).cloned().unwrap_or_else(|| label.clone()),
                        ),
                        other => other.clone(),
                    };
                    TripleConstraint { predicate: c.predicate.clone(), node, cardinality: c.cardinality }
                })
                .collect();
            constraints.sort_by_key(|c| (!vocab::is_typing_predicate(c.predicate.as_str()), c.predicate.clone()));
            Shape {
                label: renames[&shape.label].clone(),
                extra: shape.extra.clone(),
                constraints,
            }
        })
        .collect();
    let start = renames[&schema.start].clone();
    shapes.sort_by(|a, b| (a.label != start).cmp(&(b.label != start)).then_with(|| a.label.cmp(&b.label)));

    let mut canonical = Schema::assemble(PrefixMap::new(), start, shapes, schema.focus_class.clone())
        .expect("canonical labels are unique");
    canonical.prefixes = used_prefixes(&canonical, &schema.prefixes);
    canonical
}

/// Every IRI that appears in the schema, including IRI-valued labels.
pub fn all_iris(schema: &Schema) -> Vec<&str> {
    let mut out: Vec<&str> = vec![schema.focus_class.as_str(), schema.start.as_str()];
    for shape in schema.shapes() {
        out.push(shape.label.as_str());
        out.extend(shape.extra.iter().map(Iri::as_str));
        for c in &shape.constraints {
            out.push(c.predicate.as_str());
            match &c.node {
                NodeConstraint::Datatype(dt) => out.push(dt.as_str()),
                NodeConstraint::ValueSet(values) => {
                    for v in values {
                        match v {
                            ValueSetItem::Iri(iri) => out.push(iri.as_str()),
                            ValueSetItem::Literal(lit) => {
                                if let Some(dt) = &lit.datatype {
                                    out.push(dt.as_str());
                                }
                            }
                        }
                    }
                }
                NodeConstraint::ShapeRef(label) => out.push(label.as_str()),
                NodeConstraint::NodeKindIri => {}
            }
        }
    }
    out
}

fn used_prefixes(schema: &Schema, available: &PrefixMap) -> PrefixMap {
    // Drop bindings that duplicate a namespace; keep the smallest prefix name.
    let mut by_ns: BTreeMap<&str, &str> = BTreeMap::new();
    for (p, ns) in available.iter() {
        by_ns
            .entry(ns.as_str())
            .and_modify(|cur| {
                if p < *cur {
                    *cur = p;
                }
            })
            .or_insert(p);
    }
    let mut dedup = PrefixMap::new();
    for (ns, p) in &by_ns {
        dedup.insert(p, Iri::new(*ns).expect("namespace was a valid IRI"));
    }
    let mut used: BTreeSet<&str> = BTreeSet::new();
    for iri in all_iris(schema) {
        if let Some((p, _)) = dedup.compact_with(iri) {
            used.insert(p);
        }
    }
    let mut out = PrefixMap::new();
    for p in used {
        out.insert(p, dedup.get(p).expect("prefix came from map").clone());
    }
    out
}

fn canonical_labels(schema: &Schema) -> HashMap<ShapeLabel, ShapeLabel> {
    // Base label per shape; the start shape always takes the focus class.
    let mut groups: BTreeMap<String, Vec<(String, &ShapeLabel)>> = BTreeMap::new();
    for shape in schema.shapes() {
        let (base, key) = if shape.label == schema.start {
            (schema.focus_class.as_str().to_owned(), String::new())
        } else {
            let classes = shape.typing_classes();
            let content = content_key(shape, schema);
            if classes.is_empty() {
                let digest = Sha256::digest(content.as_bytes());
                (format!("urn:shape:{}", &hex::encode(digest)[..12]), content)
            } else {
                (class_set_label(&classes), content)
            }
        };
        groups.entry(base).or_default().push((key, &shape.label));
    }

    let mut renames = HashMap::new();
    for (base, mut members) in groups {
        members.sort_by(|a, b| {
            let a_start = *a.1 == schema.start;
            let b_start = *b.1 == schema.start;
            b_start.cmp(&a_start).then_with(|| a.0.cmp(&b.0))
        });
        for (i, (_, label)) in members.into_iter().enumerate() {
            let name = if i == 0 { base.clone() } else { format!("{base}__{}", i + 1) };
            renames.insert(label.clone(), ShapeLabel::new(name));
        }
    }
    renames
}

/// Deterministic label for a set of classes.
pub fn class_set_label(classes: &BTreeSet<Iri>) -> String {
    let mut iter = classes.iter();
    let first = iter.next().map(Iri::as_str).unwrap_or_default().to_owned();
    iter.fold(first, |mut acc, c| {
        acc.push_str("__");
        acc.push_str(c.local_name());
        acc
    })
}

fn content_key(shape: &Shape, schema: &Schema) -> String {
    let mut parts: Vec<String> = shape
        .constraints
        .iter()
        .map(|c| {
            let node = match &c.node {
                NodeConstraint::ShapeRef(label) => {
                    let classes = schema.shape(label).map(Shape::typing_classes).unwrap_or_default();
                    format!("@{}", class_set_label(&classes))
                }
                other => node_label(other, schema).unwrap_or_default(),
            };
            format!("{} {} {}", c.predicate, node, c.cardinality)
        })
        .collect();
    parts.sort();
    let extra: Vec<&str> = shape.extra.iter().map(Iri::as_str).collect();
    format!("EXTRA {} | {}", extra.join(" "), parts.join(" ; "))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iri(s: &str) -> Iri {
        Iri::new(s).unwrap()
    }

    fn wd(id: &str) -> Iri {
        iri(&format!("{}{id}", vocab::WD))
    }

    fn wdt(id: &str) -> Iri {
        iri(&format!("{}{id}", vocab::WDT))
    }

    fn museum() -> Schema {
        let mut museum = Shape::new(ShapeLabel::new("Museum"));
        museum.extra.insert(wdt("P31"));
        museum.constraints = vec![
            TripleConstraint::new(wdt("P31"), NodeConstraint::ValueSet(vec![ValueSetItem::Iri(wd("Q33506"))]), Cardinality::ONE),
            TripleConstraint::new(wdt("P17"), NodeConstraint::ShapeRef(ShapeLabel::new("Country")), Cardinality::ONE),
            TripleConstraint::new(wdt("P856"), NodeConstraint::NodeKindIri, Cardinality::STAR),
            TripleConstraint::new(wdt("P1174"), NodeConstraint::Datatype(iri(vocab::XSD_DECIMAL)), Cardinality::STAR),
        ];
        let mut country = Shape::new(ShapeLabel::new("Country"));
        country.extra.insert(wdt("P31"));
        country.constraints = vec![TripleConstraint::new(
            wdt("P31"),
            NodeConstraint::ValueSet(vec![ValueSetItem::Iri(wd("Q6256"))]),
            Cardinality::ONE,
        )];
        Schema::new(PrefixMap::well_known(), ShapeLabel::new("Museum"), vec![museum, country], wd("Q33506")).unwrap()
    }

    #[test]
    fn iri_rejects_whitespace_and_empty() {
        assert!(Iri::new("").is_err());
        assert!(Iri::new("http://a b").is_err());
        assert_eq!(iri("http://www.wikidata.org/entity/Q1").local_name(), "Q1");
    }

    #[test]
    fn cardinality_rejects_inverted_bounds() {
        assert!(Cardinality::bounded(2, 1).is_err());
        assert!(Cardinality::bounded(0, 0).is_ok());
        assert_eq!(Cardinality::STAR.tree_label(), "{0,*}");
    }

    #[test]
    fn default_mapping_categories() {
        let m = DatatypeMapping::default();
        assert_eq!(m.category(&NodeConstraint::Datatype(iri(vocab::XSD_DECIMAL))).unwrap(), DatatypeCategory::Decimal);
        assert_eq!(m.category(&NodeConstraint::Datatype(iri(vocab::RDF_LANG_STRING))).unwrap(), DatatypeCategory::String);
        assert_eq!(m.category(&NodeConstraint::ShapeRef(ShapeLabel::new("Country"))).unwrap(), DatatypeCategory::Iri);
        assert_eq!(m.category(&NodeConstraint::NodeKindIri).unwrap(), DatatypeCategory::Iri);
        let err = m.category(&NodeConstraint::Datatype(iri("http://www.opengis.net/ont/geosparql#wktLiteral")));
        assert!(matches!(err, Err(ModelError::UnmappedDatatype(_))));
        let lits = NodeConstraint::ValueSet(vec![
            ValueSetItem::Literal(Literal::typed("1", iri(vocab::XSD_INTEGER))),
            ValueSetItem::Literal(Literal::typed("2.5", iri(vocab::XSD_DECIMAL))),
        ]);
        assert_eq!(m.category(&lits).unwrap(), DatatypeCategory::Decimal);
    }

    #[test]
    fn classes_of_variants() {
        let s = museum();
        let vs = NodeConstraint::ValueSet(vec![ValueSetItem::Iri(wd("Q33506"))]);
        assert_eq!(classes_of(&vs, &s).unwrap(), BTreeSet::from([wd("Q33506")]));
        let r = NodeConstraint::ShapeRef(ShapeLabel::new("Country"));
        assert_eq!(classes_of(&r, &s).unwrap(), BTreeSet::from([wd("Q6256")]));
        assert!(classes_of(&NodeConstraint::NodeKindIri, &s).unwrap().is_empty());
        let dangling = NodeConstraint::ShapeRef(ShapeLabel::new("Nope"));
        assert!(matches!(classes_of(&dangling, &s), Err(ModelError::DanglingShapeRef(_))));
    }

    #[test]
    fn canonicalize_rewrites_labels_from_classes() {
        let c = canonicalize(&museum());
        assert_eq!(c.start_label().as_str(), wd("Q33506").as_str());
        let refd = c.start_shape().constraint(&wdt("P17")).unwrap();
        assert_eq!(refd.node, NodeConstraint::ShapeRef(ShapeLabel::new(wd("Q6256").as_str())));
        let preds: Vec<&str> = c.start_shape().constraints.iter().map(|c| c.predicate.local_name()).collect();
        assert_eq!(preds, ["P31", "P1174", "P17", "P856"]);
        let prefixes: Vec<&str> = c.prefixes().iter().map(|(p, _)| p).collect();
        assert_eq!(prefixes, ["wd", "wdt", "xsd"]);
        assert_eq!(canonicalize(&c), c);
    }

    #[test]
    fn canonicalize_is_order_independent() {
        let a = museum();
        let mut shapes: Vec<Shape> = a.shapes().cloned().collect();
        shapes.reverse();
        for s in &mut shapes {
            s.constraints.reverse();
        }
        let b = Schema::new(PrefixMap::well_known(), ShapeLabel::new("Museum"), shapes, wd("Q33506")).unwrap();
        assert_eq!(canonicalize(&a), canonicalize(&b));
    }

    #[test]
    fn validation_catches_invariant_breaks() {
        let s = museum();
        let mut shapes: Vec<Shape> = s.shapes().cloned().collect();
        let dup = shapes[0].constraints[0].clone();
        shapes[0].constraints.push(dup);
        let err = Schema::new(PrefixMap::new(), ShapeLabel::new("Museum"), shapes, wd("Q33506"));
        assert!(matches!(err, Err(ModelError::DuplicatePredicate { .. })));

        let empty = Shape::new(ShapeLabel::new("X"));
        let err = Schema::new(PrefixMap::new(), ShapeLabel::new("X"), vec![empty], wd("Q1"));
        assert!(matches!(err, Err(ModelError::EmptyShape(_))));

        let mut dangling = Shape::new(ShapeLabel::new("X"));
        dangling.constraints.push(TripleConstraint::new(wdt("P17"), NodeConstraint::ShapeRef(ShapeLabel::new("Y")), Cardinality::ONE));
        let err = Schema::new(PrefixMap::new(), ShapeLabel::new("X"), vec![dangling], wd("Q1"));
        assert!(matches!(err, Err(ModelError::DanglingShapeRef(_))));
    }

    #[test]
    fn compact_prefers_longest_namespace() {
        let mut p = PrefixMap::new();
        p.insert("a", iri("http://ex.org/"));
        p.insert("b", iri("http://ex.org/sub/"));
        assert_eq!(p.compact("http://ex.org/sub/x").unwrap(), "b:x");
        assert_eq!(p.compact("http://ex.org/y").unwrap(), "a:y");
        assert_eq!(p.compact("http://ex.org/has space"), None);
    }
}
