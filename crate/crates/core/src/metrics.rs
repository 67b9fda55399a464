//! Schema trees and tree-edit similarity.

use serde::{Deserialize, Serialize};

use crate::error::MetricsError;
use crate::model::{canonicalize, node_label, Iri, Schema};

/// Rooted, ordered, labeled tree.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SchemaTree {
    pub label: String,
    pub children: Vec<SchemaTree>,
}

impl SchemaTree {
    pub fn leaf(label: impl Into<String>) -> Self {
        SchemaTree { label: label.into(), children: Vec::new() }
    }

    pub fn node(label: impl Into<String>, children: Vec<SchemaTree>) -> Self {
        SchemaTree { label: label.into(), children }
    }

    pub fn size(&self) -> usize {
        1 + self.children.iter().map(SchemaTree::size).sum::<usize>()
    }

    pub fn depth(&self) -> usize {
        self.children.iter().map(|c| 1 + c.depth()).max().unwrap_or(0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EditCostModel {
    pub insert: u64,
    pub delete: u64,
    pub relabel: u64,
}

impl Default for EditCostModel {
    fn default() -> Self {
        EditCostModel { insert: 1, delete: 1, relabel: 1 }
    }
}

/// Tree for `schema` rooted at its own focus class.
pub fn schema_to_tree(schema: &Schema) -> Result<SchemaTree, MetricsError> {
    schema_to_tree_rooted(schema, schema.focus_class())
}

/// Tree for `schema` with an explicit root label. Predicate children are
/// ordered by IRI; each carries its node-constraint label and cardinality.
pub fn schema_to_tree_rooted(schema: &Schema, root: &Iri) -> Result<SchemaTree, MetricsError> {
    let canon = canonicalize(schema);
    let mut children = Vec::with_capacity(canon.constraint_count());
    for c in &canon.start_shape().constraints {
        let node = node_label(&c.node, &canon)?;
        children.push(SchemaTree::node(
            c.predicate.as_str(),
            vec![SchemaTree::node(node, vec![SchemaTree::leaf(c.cardinality.tree_label())])],
        ));
    }
    Ok(SchemaTree::node(root.as_str(), children))
}

struct Flat<'a> {
    labels: Vec<&'a str>,
    leftmost: Vec<usize>,
    keyroots: Vec<usize>,
}

fn flatten(tree: &SchemaTree) -> Flat<'_> {
    fn walk<'a>(t: &'a SchemaTree, labels: &mut Vec<&'a str>, leftmost: &mut Vec<usize>) -> usize {
        let mut first_leaf = None;
        for child in &t.children {
            let l = walk(child, labels, leftmost);
            first_leaf.get_or_insert(l);
        }
        let idx = labels.len();
        labels.push(&t.label);
        let l = first_leaf.unwrap_or(idx);
        leftmost.push(l);
        l
    }
    let mut labels = Vec::new();
    let mut leftmost = Vec::new();
    walk(tree, &mut labels, &mut leftmost);
    let n = labels.len();
    // A keyroot is the highest node with a given leftmost leaf.
    let mut keyroots = Vec::new();
    for i in 0..n {
        if !(i + 1..n).any(|k| leftmost[k] == leftmost[i]) {
            keyroots.push(i);
        }
    }
    Flat { labels, leftmost, keyroots }
}

/// Zhang–Shasha ordered tree edit distance.
pub fn tree_edit_distance(a: &SchemaTree, b: &SchemaTree, costs: &EditCostModel) -> u64 {
    let fa = flatten(a);
    let fb = flatten(b);
    let (n, m) = (fa.labels.len(), fb.labels.len());
    let mut td = vec![vec![0u64; m]; n];
    let mut fd = vec![vec![0u64; m + 1]; n + 1];
    for &i in &fa.keyroots {
        for &j in &fb.keyroots {
            let (li, lj) = (fa.leftmost[i], fb.leftmost[j]);
            // fd is indexed relative to (li, lj), offset by one for the empty forest.
            fd[0][0] = 0;
            for x in li..=i {
                fd[x - li + 1][0] = fd[x - li][0] + costs.delete;
            }
            for y in lj..=j {
                fd[0][y - lj + 1] = fd[0][y - lj] + costs.insert;
            }
            for x in li..=i {
                for y in lj..=j {
                    let (xi, yi) = (x - li + 1, y - lj + 1);
                    let del = fd[xi - 1][yi] + costs.delete;
                    let ins = fd[xi][yi - 1] + costs.insert;
                    if fa.leftmost[x] == li && fb.leftmost[y] == lj {
                        let rel = if fa.labels[x] == fb.labels[y] { 0 } else { costs.relabel };
                        let val = del.min(ins).min(fd[xi - 1][yi - 1] + rel);
                        fd[xi][yi] = val;
                        td[x][y] = val;
                    } else {
                        let (px, py) = (fa.leftmost[x] - li, fb.leftmost[y] - lj);
                        fd[xi][yi] = del.min(ins).min(fd[px][py] + td[x][y]);
                    }
                }
            }
        }
    }
    td[n - 1][m - 1]
}

/// GED between the trees of two schemas, both rooted at the ground truth's
/// focus class.
pub fn ged(generated: &Schema, ground_truth: &Schema) -> Result<u64, MetricsError> {
    let root = ground_truth.focus_class();
    let a = schema_to_tree_rooted(generated, root)?;
    let b = schema_to_tree_rooted(ground_truth, root)?;
    Ok(tree_edit_distance(&a, &b, &EditCostModel::default()))
}

/// Distance normalized by `3 * |ground-truth constraints|`.
pub fn nged(generated: &Schema, ground_truth: &Schema) -> Result<f64, MetricsError> {
    let n = ground_truth.constraint_count();
    if n == 0 {
        return Err(MetricsError::EmptyGroundTruth);
    }
    Ok(ged(generated, ground_truth)? as f64 / (3 * n) as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistanceSummary {
    pub n: usize,
    pub mean_ged: f64,
    pub mean_nged: f64,
}

/// Mean GED and NGED over `(generated, ground_truth)` pairs.
pub fn aggregate_distances(pairs: &[(Schema, Schema)]) -> Result<DistanceSummary, MetricsError> {
    let values = pairs
        .iter()
        .map(|(g, t)| Ok((ged(g, t)? as f64, nged(g, t)?)))
        .collect::<Result<Vec<_>, MetricsError>>()?;
    summarize_distances(&values)
}

/// Means over precomputed `(ged, nged)` values.
pub fn summarize_distances(values: &[(f64, f64)]) -> Result<DistanceSummary, MetricsError> {
    if values.is_empty() {
        return Err(MetricsError::EmptyDataset);
    }
    let n = values.len() as f64;
    Ok(DistanceSummary {
        n: values.len(),
        mean_ged: values.iter().map(|v| v.0).sum::<f64>() / n,
        mean_nged: values.iter().map(|v| v.1).sum::<f64>() / n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(label: &str, children: Vec<SchemaTree>) -> SchemaTree {
        SchemaTree::node(label, children)
    }

    #[test]
    fn classic_example() {
        // f(d(a c(b)) e) vs f(c(d(a b)) e): distance 2.
        let a = t("f", vec![t("d", vec![t("a", vec![]), t("c", vec![t("b", vec![])])]), t("e", vec![])]);
        let b = t("f", vec![t("c", vec![t("d", vec![t("a", vec![]), t("b", vec![])])]), t("e", vec![])]);
        let c = EditCostModel::default();
        assert_eq!(tree_edit_distance(&a, &b, &c), 2);
        assert_eq!(tree_edit_distance(&b, &a, &c), 2);
        assert_eq!(tree_edit_distance(&a, &a, &c), 0);
    }

    #[test]
    fn single_nodes() {
        let c = EditCostModel::default();
        assert_eq!(tree_edit_distance(&SchemaTree::leaf("x"), &SchemaTree::leaf("x"), &c), 0);
        assert_eq!(tree_edit_distance(&SchemaTree::leaf("x"), &SchemaTree::leaf("y"), &c), 1);
        let chain = t("x", vec![t("p", vec![t("n", vec![t("{1,1}", vec![])])])]);
        assert_eq!(tree_edit_distance(&SchemaTree::leaf("x"), &chain, &c), 3);
    }

    #[test]
    fn summary_errors_on_empty() {
        assert_eq!(summarize_distances(&[]), Err(MetricsError::EmptyDataset));
        let s = summarize_distances(&[(3.0, 1.0), (0.0, 0.0)]).unwrap();
        assert_eq!(s.mean_nged, 0.5);
        assert_eq!(s.n, 2);
    }
}
