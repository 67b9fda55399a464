//! Binary CART trees: Gini classification and least-squares regression.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Node {
    Leaf { value: f64 },
    Split { feature: usize, threshold: f64, left: Box<Node>, right: Box<Node> },
}

impl Node {
    pub fn eval(&self, x: &[f64]) -> f64 {
        let mut node = self;
        loop {
            match node {
                Node::Leaf { value } => return *value,
                Node::Split { feature, threshold, left, right } => {
                    node = if x[*feature] <= *threshold { left } else { right };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Node::Leaf { .. } => 0,
            Node::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    pub fn leaves(&self) -> usize {
        match self {
            Node::Leaf { .. } => 1,
            Node::Split { left, right, .. } => left.leaves() + right.leaves(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    pub max_depth: usize,
    pub min_leaf: usize,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams { max_depth: 6, min_leaf: 5 }
    }
}

/// Best split of `idx` under `score` (lower is better), as
/// `(feature, threshold, score)`. Ties keep the first candidate found.
fn best_split(
    x: &[Vec<f64>],
    idx: &[usize],
    min_leaf: usize,
    score: &dyn Fn(&[usize], &[usize]) -> f64,
) -> Option<(usize, f64, f64)> {
    let dims = x.first().map_or(0, Vec::len);
    let mut best: Option<(usize, f64, f64)> = None;
    for f in 0..dims {
        let mut sorted = idx.to_vec();
        sorted.sort_by(|&a, &b| x[a][f].total_cmp(&x[b][f]).then(a.cmp(&b)));
        for cut in min_leaf.max(1)..=sorted.len().saturating_sub(min_leaf.max(1)) {
            let (lo, hi) = (x[sorted[cut - 1]][f], x[sorted[cut]][f]);
            if lo == hi {
                continue;
            }
            let s = score(&sorted[..cut], &sorted[cut..]);
            if best.is_none_or(|b| s < b.2 - 1e-12) {
                best = Some((f, lo + (hi - lo) / 2.0, s));
            }
        }
    }
    best
}

fn gini(idx: &[usize], y: &[bool]) -> f64 {
    if idx.is_empty() {
        return 0.0;
    }
    let p = idx.iter().filter(|&&i| y[i]).count() as f64 / idx.len() as f64;
    2.0 * p * (1.0 - p)
}

fn positive_share(idx: &[usize], y: &[bool]) -> f64 {
    idx.iter().filter(|&&i| y[i]).count() as f64 / idx.len().max(1) as f64
}

/// Classification tree; leaves hold the share of positive rows.
pub fn fit_classifier(x: &[Vec<f64>], y: &[bool], params: &TreeParams) -> Node {
    let idx: Vec<usize> = (0..y.len()).collect();
    grow_classifier(x, y, &idx, params, 0)
}

fn grow_classifier(x: &[Vec<f64>], y: &[bool], idx: &[usize], params: &TreeParams, depth: usize) -> Node {
    let leaf = Node::Leaf { value: positive_share(idx, y) };
    if depth >= params.max_depth || gini(idx, y) == 0.0 || idx.len() < 2 * params.min_leaf.max(1) {
        return leaf;
    }
    let score = |l: &[usize], r: &[usize]| (l.len() as f64 * gini(l, y) + r.len() as f64 * gini(r, y)) / idx.len() as f64;
    let Some((feature, threshold, _)) = best_split(x, idx, params.min_leaf, &score) else {
        return leaf;
    };
    let (l, r): (Vec<usize>, Vec<usize>) = idx.iter().partition(|&&i| x[i][feature] <= threshold);
    Node::Split {
        feature,
        threshold,
        left: Box::new(grow_classifier(x, y, &l, params, depth + 1)),
        right: Box::new(grow_classifier(x, y, &r, params, depth + 1)),
    }
}

fn sse(idx: &[usize], t: &[f64]) -> f64 {
    if idx.is_empty() {
        return 0.0;
    }
    let mean = idx.iter().map(|&i| t[i]).sum::<f64>() / idx.len() as f64;
    idx.iter().map(|&i| (t[i] - mean).powi(2)).sum()
}

/// Least-squares regression tree on `target` over the rows in `idx`; each
/// leaf takes `leaf_value` of its rows.
pub fn fit_regressor(
    x: &[Vec<f64>],
    target: &[f64],
    idx: &[usize],
    params: &TreeParams,
    leaf_value: &dyn Fn(&[usize]) -> f64,
) -> Node {
    grow_regressor(x, target, idx, params, 0, leaf_value)
}

fn grow_regressor(
    x: &[Vec<f64>],
    t: &[f64],
    idx: &[usize],
    params: &TreeParams,
    depth: usize,
    leaf_value: &dyn Fn(&[usize]) -> f64,
) -> Node {
    let leaf = || Node::Leaf { value: leaf_value(idx) };
    let here = sse(idx, t);
    if depth >= params.max_depth || here <= 1e-12 || idx.len() < 2 * params.min_leaf.max(1) {
        return leaf();
    }
    let score = |l: &[usize], r: &[usize]| sse(l, t) + sse(r, t);
    match best_split(x, idx, params.min_leaf, &score) {
        Some((feature, threshold, s)) if s < here - 1e-12 => {
            let (l, r): (Vec<usize>, Vec<usize>) = idx.iter().partition(|&&i| x[i][feature] <= threshold);
            Node::Split {
                feature,
                threshold,
                left: Box::new(grow_regressor(x, t, &l, params, depth + 1, leaf_value)),
                right: Box::new(grow_regressor(x, t, &r, params, depth + 1, leaf_value)),
            }
        }
        _ => leaf(),
    }
}
