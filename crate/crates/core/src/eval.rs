//! Constraint-level matching under the six criteria and the error breakdown.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::EvalError;
use crate::model::{canonicalize, classes_of, node_label, Cardinality, DatatypeMapping, Iri, Max, Schema, TripleConstraint};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeMode {
    Exact,
    Subclass,
    Datatype,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CardinalityMode {
    Exact,
    Loosened,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MatchCriteria {
    pub node: NodeMode,
    pub cardinality: CardinalityMode,
}

impl MatchCriteria {
    pub const EXACT: MatchCriteria = MatchCriteria { node: NodeMode::Exact, cardinality: CardinalityMode::Exact };

    pub fn new(node: NodeMode, cardinality: CardinalityMode) -> Self {
        MatchCriteria { node, cardinality }
    }

    /// All six combinations, node mode major.
    pub fn all() -> [MatchCriteria; 6] {
        use CardinalityMode as C;
        use NodeMode as N;
        [
            MatchCriteria::new(N::Exact, C::Exact),
            MatchCriteria::new(N::Exact, C::Loosened),
            MatchCriteria::new(N::Subclass, C::Exact),
            MatchCriteria::new(N::Subclass, C::Loosened),
            MatchCriteria::new(N::Datatype, C::Exact),
            MatchCriteria::new(N::Datatype, C::Loosened),
        ]
    }
}

impl Default for MatchCriteria {
    fn default() -> Self {
        MatchCriteria::EXACT
    }
}

impl fmt::Display for NodeMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NodeMode::Exact => "exact",
            NodeMode::Subclass => "subclass",
            NodeMode::Datatype => "datatype",
        })
    }
}

impl fmt::Display for CardinalityMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CardinalityMode::Exact => "exact",
            CardinalityMode::Loosened => "loosened",
        })
    }
}

impl fmt::Display for MatchCriteria {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "node={},card={}", self.node, self.cardinality)
    }
}

impl FromStr for MatchCriteria {
    type Err = String;

    /// Accepts `node=<exact|subclass|datatype>,card=<exact|loosened>` in
    /// either order; omitted parts default to exact.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut criteria = MatchCriteria::EXACT;
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, value) = part.split_once('=').ok_or_else(|| format!("expected key=value, got {part:?}"))?;
            match (key.trim(), value.trim().to_ascii_lowercase().as_str()) {
                ("node", "exact") => criteria.node = NodeMode::Exact,
                ("node", "subclass") => criteria.node = NodeMode::Subclass,
                ("node", "datatype") => criteria.node = NodeMode::Datatype,
                ("card" | "cardinality", "exact") => criteria.cardinality = CardinalityMode::Exact,
                ("card" | "cardinality", "loosened") => criteria.cardinality = CardinalityMode::Loosened,
                _ => return Err(format!("unknown criterion {part:?}")),
            }
        }
        Ok(criteria)
    }
}

/// Subclass and property-constraint knowledge used by SUBCLASS matching.
pub trait SubclassOracle: Send + Sync {
    /// Reflexive-transitive `sub ⊑ sup`.
    fn is_subclass_of(&self, sub: &Iri, sup: &Iri) -> Result<bool, EvalError>;

    /// Value-type constraint classes declared for a predicate, if any.
    fn value_type_classes(&self, predicate: &Iri) -> Result<BTreeSet<Iri>, EvalError>;
}

/// In-memory oracle over an explicit subclass relation.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct StaticOracle {
    pub superclasses: BTreeMap<Iri, BTreeSet<Iri>>,
    #[serde(default)]
    pub value_types: BTreeMap<Iri, BTreeSet<Iri>>,
}

impl StaticOracle {
    pub fn new() -> Self {
        StaticOracle::default()
    }

    pub fn add_subclass(&mut self, sub: Iri, sup: Iri) {
        self.superclasses.entry(sub).or_default().insert(sup);
    }

    pub fn add_value_type(&mut self, predicate: Iri, class: Iri) {
        self.value_types.entry(predicate).or_default().insert(class);
    }
}

impl SubclassOracle for StaticOracle {
    fn is_subclass_of(&self, sub: &Iri, sup: &Iri) -> Result<bool, EvalError> {
        let mut seen = BTreeSet::new();
        let mut stack = vec![sub];
        while let Some(c) = stack.pop() {
            if c == sup {
                return Ok(true);
            }
            if seen.insert(c) {
                if let Some(parents) = self.superclasses.get(c) {
                    stack.extend(parents.iter());
                }
            }
        }
        Ok(false)
    }

    fn value_type_classes(&self, predicate: &Iri) -> Result<BTreeSet<Iri>, EvalError> {
        Ok(self.value_types.get(predicate).cloned().unwrap_or_default())
    }
}

/// Everything the matcher needs besides the two constraints.
pub struct MatchContext<'a> {
    pub oracle: Option<&'a dyn SubclassOracle>,
    pub mapping: &'a DatatypeMapping,
    /// Enables the predicate value-type fallback of SUBCLASS matching.
    pub value_type_fallback: bool,
}

impl<'a> MatchContext<'a> {
    pub fn new(mapping: &'a DatatypeMapping) -> Self {
        MatchContext { oracle: None, mapping, value_type_fallback: false }
    }

    pub fn with_oracle(mut self, oracle: &'a dyn SubclassOracle) -> Self {
        self.oracle = Some(oracle);
        self
    }

    pub fn with_value_type_fallback(mut self, enabled: bool) -> Self {
        self.value_type_fallback = enabled;
        self
    }
}

/// True when the ground-truth interval lies inside the generated one.
pub fn cardinality_loosened(gt: &Cardinality, gen: &Cardinality) -> bool {
    let upper = match (gt.max(), gen.max()) {
        (_, Max::Unbounded) => true,
        (Max::Unbounded, Max::Bounded(_)) => false,
        (Max::Bounded(m), Max::Bounded(m2)) => m <= m2,
    };
    gen.min() <= gt.min() && upper
}

fn node_exact(gt: &TripleConstraint, gen: &TripleConstraint, gt_schema: &Schema, gen_schema: &Schema) -> Result<bool, EvalError> {
    use crate::model::NodeConstraint as N;
    Ok(match (&gt.node, &gen.node) {
        (N::ShapeRef(_), N::ShapeRef(_)) => node_label(&gt.node, gt_schema)? == node_label(&gen.node, gen_schema)?,
        (N::ValueSet(a), N::ValueSet(b)) => {
            let a: BTreeSet<_> = a.iter().collect();
            let b: BTreeSet<_> = b.iter().collect();
            a == b
        }
        (a, b) => a == b,
    })
}

fn any_subclass(
    oracle: &dyn SubclassOracle,
    subs: &BTreeSet<Iri>,
    sups: &BTreeSet<Iri>,
) -> Result<bool, EvalError> {
    for c in subs {
        for c2 in sups {
            if oracle.is_subclass_of(c, c2)? {
                return Ok(true);
            }
        }
    }
    Ok(false)
}

fn node_matches(
    gt: &TripleConstraint,
    gen: &TripleConstraint,
    mode: NodeMode,
    ctx: &MatchContext<'_>,
    gt_schema: &Schema,
    gen_schema: &Schema,
) -> Result<bool, EvalError> {
    match mode {
        NodeMode::Exact => node_exact(gt, gen, gt_schema, gen_schema),
        NodeMode::Subclass => {
            let oracle = ctx.oracle.ok_or(EvalError::OracleUnavailable)?;
            let gt_classes = classes_of(&gt.node, gt_schema)?;
            let gen_classes = classes_of(&gen.node, gen_schema)?;
            if gt_classes.is_empty() || gen_classes.is_empty() {
                return node_exact(gt, gen, gt_schema, gen_schema);
            }
            if node_exact(gt, gen, gt_schema, gen_schema)? || any_subclass(oracle, &gt_classes, &gen_classes)? {
                return Ok(true);
            }
            if ctx.value_type_fallback {
                let declared = oracle.value_type_classes(&gt.predicate)?;
                return any_subclass(oracle, &declared, &gen_classes);
            }
            Ok(false)
        }
        NodeMode::Datatype => {
            match (ctx.mapping.category(&gt.node), ctx.mapping.category(&gen.node)) {
                (Ok(a), Ok(b)) => Ok(a == b),
                // Unmapped datatypes compare by raw identity.
                _ => node_exact(gt, gen, gt_schema, gen_schema),
            }
        }
    }
}

/// Whether a generated constraint matches a ground-truth constraint.
pub fn constraint_matches(
    gt: &TripleConstraint,
    gen: &TripleConstraint,
    criteria: MatchCriteria,
    ctx: &MatchContext<'_>,
    gt_schema: &Schema,
    gen_schema: &Schema,
) -> Result<bool, EvalError> {
    if criteria.node == NodeMode::Subclass && ctx.oracle.is_none() {
        return Err(EvalError::OracleUnavailable);
    }
    if gt.predicate != gen.predicate {
        return Ok(false);
    }
    let card_ok = match criteria.cardinality {
        CardinalityMode::Exact => gt.cardinality == gen.cardinality,
        CardinalityMode::Loosened => cardinality_loosened(&gt.cardinality, &gen.cardinality),
    };
    if !card_ok {
        return Ok(false);
    }
    node_matches(gt, gen, criteria.node, ctx, gt_schema, gen_schema)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ErrorBreakdown {
    pub correct: usize,
    pub missing_predicate: usize,
    pub wrong_cardinality: usize,
    pub wrong_node_constraint: usize,
    pub both_wrong: usize,
}

impl ErrorBreakdown {
    pub fn total(&self) -> usize {
        self.correct + self.missing_predicate + self.wrong_cardinality + self.wrong_node_constraint + self.both_wrong
    }

    pub fn add(&mut self, other: &ErrorBreakdown) {
        self.correct += other.correct;
        self.missing_predicate += other.missing_predicate;
        self.wrong_cardinality += other.wrong_cardinality;
        self.wrong_node_constraint += other.wrong_node_constraint;
        self.both_wrong += other.both_wrong;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub criteria: MatchCriteria,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub matched_count: usize,
    pub generated_count: usize,
    pub ground_truth_count: usize,
    pub error_breakdown: ErrorBreakdown,
}

pub fn f1_score(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Scores a generated schema against ground truth under one criterion. The
/// breakdown is computed under `breakdown_criteria`.
pub fn evaluate_pair_with(
    gen: &Schema,
    gt: &Schema,
    criteria: MatchCriteria,
    breakdown_criteria: MatchCriteria,
    ctx: &MatchContext<'_>,
) -> Result<EvalReport, EvalError> {
    if criteria.node == NodeMode::Subclass && ctx.oracle.is_none() {
        return Err(EvalError::OracleUnavailable);
    }
    let gen = canonicalize(gen);
    let gt = canonicalize(gt);
    let gen_constraints = &gen.start_shape().constraints;
    let gt_constraints = &gt.start_shape().constraints;
    let mut matched = 0;
    for g in gt_constraints {
        if let Some(c) = gen_constraints.iter().find(|c| c.predicate == g.predicate) {
            if constraint_matches(g, c, criteria, ctx, &gt, &gen)? {
                matched += 1;
            }
        }
    }
    let precision = ratio(matched, gen_constraints.len());
    let recall = ratio(matched, gt_constraints.len());
    Ok(EvalReport {
        criteria,
        precision,
        recall,
        f1: f1_score(precision, recall),
        matched_count: matched,
        generated_count: gen_constraints.len(),
        ground_truth_count: gt_constraints.len(),
        error_breakdown: categorize_errors_with(&gen, &gt, breakdown_criteria, ctx)?,
    })
}

pub fn evaluate_pair(gen: &Schema, gt: &Schema, criteria: MatchCriteria, ctx: &MatchContext<'_>) -> Result<EvalReport, EvalError> {
    evaluate_pair_with(gen, gt, criteria, MatchCriteria::EXACT, ctx)
}

/// Five-way classification of each ground-truth constraint under EXACT.
pub fn categorize_errors(gen: &Schema, gt: &Schema) -> ErrorBreakdown {
    let mapping = DatatypeMapping::default();
    categorize_errors_with(gen, gt, MatchCriteria::EXACT, &MatchContext::new(&mapping))
        .expect("exact comparison needs no oracle")
}

pub fn categorize_errors_with(
    gen: &Schema,
    gt: &Schema,
    criteria: MatchCriteria,
    ctx: &MatchContext<'_>,
) -> Result<ErrorBreakdown, EvalError> {
    let gen = canonicalize(gen);
    let gt = canonicalize(gt);
    let mut out = ErrorBreakdown::default();
    for g in &gt.start_shape().constraints {
        let Some(c) = gen.start_shape().constraints.iter().find(|c| c.predicate == g.predicate) else {
            out.missing_predicate += 1;
            continue;
        };
        let card_ok = match criteria.cardinality {
            CardinalityMode::Exact => g.cardinality == c.cardinality,
            CardinalityMode::Loosened => cardinality_loosened(&g.cardinality, &c.cardinality),
        };
        let node_ok = node_matches(g, c, criteria.node, ctx, &gt, &gen)?;
        match (node_ok, card_ok) {
            (true, true) => out.correct += 1,
            (true, false) => out.wrong_cardinality += 1,
            (false, true) => out.wrong_node_constraint += 1,
            (false, false) => out.both_wrong += 1,
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MacroAverage {
    pub n: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Unweighted means of per-schema P, R and F1.
pub fn macro_average(reports: &[EvalReport]) -> Result<MacroAverage, EvalError> {
    if reports.is_empty() {
        return Err(EvalError::EmptyDataset);
    }
    let n = reports.len() as f64;
    Ok(MacroAverage {
        n: reports.len(),
        precision: reports.iter().map(|r| r.precision).sum::<f64>() / n,
        recall: reports.iter().map(|r| r.recall).sum::<f64>() / n,
        f1: reports.iter().map(|r| r.f1).sum::<f64>() / n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn card(min: u32, max: Option<u32>) -> Cardinality {
        match max {
            Some(m) => Cardinality::bounded(min, m).unwrap(),
            None => Cardinality::at_least(min),
        }
    }

    #[test]
    fn loosened_examples() {
        assert!(cardinality_loosened(&card(1, Some(1)), &card(0, None)));
        assert!(!cardinality_loosened(&card(0, None), &card(1, Some(1))));
        assert!(cardinality_loosened(&card(2, None), &card(1, None)));
        assert!(!cardinality_loosened(&card(1, None), &card(1, Some(5))));
    }

    #[test]
    fn criteria_parse_and_display() {
        let c: MatchCriteria = "node=subclass,card=loosened".parse().unwrap();
        assert_eq!(c, MatchCriteria::new(NodeMode::Subclass, CardinalityMode::Loosened));
        assert_eq!(c.to_string().parse::<MatchCriteria>().unwrap(), c);
        assert_eq!("card=loosened".parse::<MatchCriteria>().unwrap().node, NodeMode::Exact);
        assert!("node=fuzzy".parse::<MatchCriteria>().is_err());
    }

    #[test]
    fn static_oracle_is_reflexive_and_transitive() {
        let iri = |s: &str| Iri::new(s).unwrap();
        let mut o = StaticOracle::new();
        o.add_subclass(iri("ex:a"), iri("ex:b"));
        o.add_subclass(iri("ex:b"), iri("ex:c"));
        o.add_subclass(iri("ex:c"), iri("ex:a"));
        assert!(o.is_subclass_of(&iri("ex:a"), &iri("ex:a")).unwrap());
        assert!(o.is_subclass_of(&iri("ex:a"), &iri("ex:c")).unwrap());
        assert!(!o.is_subclass_of(&iri("ex:a"), &iri("ex:d")).unwrap());
    }

    #[test]
    fn macro_average_means() {
        let base = EvalReport {
            criteria: MatchCriteria::EXACT,
            precision: 1.0,
            recall: 1.0,
            f1: 1.0,
            matched_count: 1,
            generated_count: 1,
            ground_truth_count: 1,
            error_breakdown: ErrorBreakdown::default(),
        };
        let zero = EvalReport { precision: 0.0, recall: 0.0, f1: 0.0, ..base.clone() };
        let m = macro_average(&[base, zero]).unwrap();
        assert_eq!((m.precision, m.recall, m.f1), (0.5, 0.5, 0.5));
        assert!(matches!(macro_average(&[]), Err(EvalError::EmptyDataset)));
    }
}
