//! Seeded perturbation of ground-truth schemas into plausible "generated"
//! schemas, together with the subclass facts the perturbations rely on.

use rand::seq::SliceRandom;
use rand::Rng;
use shexgen_core::vocab;
use shexgen_core::{
    Cardinality, Iri, NodeConstraint, Schema, Shape, ShapeLabel, StaticOracle, TripleConstraint, ValueSetItem,
};

pub struct Mutated {
    pub schema: Schema,
    pub oracle: StaticOracle,
}

const CARDINALITIES: [(u32, Option<u32>); 6] = [(1, Some(1)), (0, Some(1)), (0, None), (1, None), (0, Some(3)), (2, None)];

const DATATYPES: [&str; 8] = [
    vocab::XSD_STRING,
    vocab::XSD_DECIMAL,
    vocab::XSD_INTEGER,
    vocab::XSD_DOUBLE,
    vocab::XSD_DATETIME,
    vocab::XSD_DATE,
    vocab::RDF_LANG_STRING,
    vocab::XSD_ANY_URI,
];

fn random_cardinality<R: Rng>(rng: &mut R, not: Cardinality) -> Cardinality {
    loop {
        let (min, max) = *CARDINALITIES.choose(rng).unwrap();
        let c = match max {
            Some(m) => Cardinality::bounded(min, m).unwrap(),
            None => Cardinality::at_least(min),
        };
        if c != not {
            return c;
        }
    }
}

struct Ctx {
    typing: Iri,
    extra_shapes: Vec<Shape>,
    oracle: StaticOracle,
    counter: usize,
}

impl Ctx {
    fn superclass_of(&mut self, class: &Iri) -> Iri {
        self.counter += 1;
        let sup = Iri::new(format!("{}__super{}", class.as_str(), self.counter)).unwrap();
        self.oracle.add_subclass(class.clone(), sup.clone());
        sup
    }

    fn unrelated_class(&mut self) -> Iri {
        self.counter += 1;
        Iri::new(format!("urn:mut:class{}", self.counter)).unwrap()
    }

    fn typed_shape(&mut self, classes: Vec<Iri>) -> ShapeLabel {
        self.counter += 1;
        let label = ShapeLabel::new(format!("urn:mut:shape{}", self.counter));
        let mut shape = Shape::new(label.clone());
        shape.extra.insert(self.typing.clone());
        shape.constraints.push(TripleConstraint::new(
            self.typing.clone(),
            NodeConstraint::ValueSet(classes.into_iter().map(ValueSetItem::Iri).collect()),
            Cardinality::ONE,
        ));
        self.extra_shapes.push(shape);
        label
    }
}

fn mutate_node<R: Rng>(rng: &mut R, tc: &TripleConstraint, gt: &Schema, ctx: &mut Ctx) -> NodeConstraint {
    match &tc.node {
        NodeConstraint::Datatype(dt) => {
            if rng.gen_bool(0.25) {
                return NodeConstraint::NodeKindIri;
            }
            loop {
                let cand = Iri::new(*DATATYPES.choose(rng).unwrap()).unwrap();
                if &cand != dt {
                    return NodeConstraint::Datatype(cand);
                }
            }
        }
        NodeConstraint::NodeKindIri => {
            if rng.gen_bool(0.5) {
                NodeConstraint::Datatype(Iri::new(vocab::XSD_ANY_URI).unwrap())
            } else {
                NodeConstraint::Datatype(Iri::new(vocab::XSD_STRING).unwrap())
            }
        }
        NodeConstraint::ValueSet(values) => {
            let iris: Vec<Iri> = values.iter().filter_map(ValueSetItem::as_iri).cloned().collect();
            if iris.is_empty() {
                return NodeConstraint::Datatype(Iri::new(vocab::XSD_STRING).unwrap());
            }
            let pick = rng.gen_range(0..3);
            match pick {
                0 => {
                    let sup = ctx.superclass_of(&iris[0]);
                    NodeConstraint::ValueSet(vec![ValueSetItem::Iri(sup)])
                }
                1 => NodeConstraint::ValueSet(vec![ValueSetItem::Iri(ctx.unrelated_class())]),
                _ => {
                    let label = ctx.typed_shape(iris);
                    NodeConstraint::ShapeRef(label)
                }
            }
        }
        NodeConstraint::ShapeRef(label) => {
            let classes: Vec<Iri> = gt.shape(label).map(|s| s.typing_classes_ordered()).unwrap_or_default();
            let pick = rng.gen_range(0..3);
            match (pick, classes.first()) {
                (0, Some(c)) => {
                    let c = c.clone();
                    let sup = ctx.superclass_of(&c);
                    NodeConstraint::ShapeRef(ctx.typed_shape(vec![sup]))
                }
                (1, _) => {
                    let other = ctx.unrelated_class();
                    NodeConstraint::ShapeRef(ctx.typed_shape(vec![other]))
                }
                _ => NodeConstraint::NodeKindIri,
            }
        }
    }
}

/// Perturbs the start shape of `gt`: drops, cardinality changes, node
/// changes, both, and occasional extra predicates.
pub fn mutate_schema<R: Rng>(rng: &mut R, gt: &Schema) -> Mutated {
    let start = gt.start_shape();
    let typing = start
        .constraints
        .iter()
        .map(|c| &c.predicate)
        .find(|p| vocab::is_typing_predicate(p.as_str()))
        .cloned()
        .unwrap_or_else(|| Iri::new(vocab::WDT_P31).unwrap());
    let mut ctx = Ctx { typing, extra_shapes: Vec::new(), oracle: StaticOracle::new(), counter: 0 };
    let mut constraints = Vec::new();
    for tc in &start.constraints {
        let roll: f64 = rng.gen();
        let mut out = tc.clone();
        if roll < 0.35 {
            // unchanged
        } else if roll < 0.5 {
            continue;
        } else if roll < 0.65 {
            out.cardinality = random_cardinality(rng, tc.cardinality);
        } else if roll < 0.85 {
            out.node = mutate_node(rng, tc, gt, &mut ctx);
        } else {
            out.cardinality = random_cardinality(rng, tc.cardinality);
            out.node = mutate_node(rng, tc, gt, &mut ctx);
        }
        constraints.push(out);
    }
    if constraints.is_empty() {
        constraints.push(start.constraints[0].clone());
    }
    let extras = if rng.gen_bool(0.3) { rng.gen_range(1..=2) } else { 0 };
    for k in 0..extras {
        let pred = Iri::new(format!("urn:mut:extraPredicate{k}")).unwrap();
        constraints.push(TripleConstraint::new(pred, NodeConstraint::NodeKindIri, Cardinality::STAR));
    }
    constraints.shuffle(rng);

    let mut new_start = start.clone();
    new_start.constraints = constraints;
    let mut shapes = vec![new_start];
    shapes.extend(gt.shapes().filter(|s| s.label != start.label).cloned());
    shapes.extend(ctx.extra_shapes);
    let schema = Schema::new(gt.prefixes().clone(), start.label.clone(), shapes, gt.focus_class().clone())
        .expect("mutations preserve schema invariants");
    Mutated { schema, oracle: ctx.oracle }
}

/// `gt` with `k` start-shape constraints removed (the first `k` in order).
pub fn drop_constraints(gt: &Schema, k: usize) -> Schema {
    let keep: Vec<_> = gt.start_shape().constraints.iter().skip(k).map(|c| c.predicate.clone()).collect();
    gt.retain_start_constraints(|c| keep.contains(&c.predicate))
}
