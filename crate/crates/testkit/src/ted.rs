//! Exhaustive tree-edit-distance oracle.
//!
//! Enumerates every valid ordered edit mapping between the two trees and
//! prices it as relabels of mapped pairs plus deletions and insertions of the
//! unmapped nodes. Exponential, so only for small trees.

use shexgen_core::{EditCostModel, SchemaTree};

struct Indexed<'a> {
    labels: Vec<&'a str>,
    /// Preorder index of the last descendant of each node.
    last_desc: Vec<usize>,
}

impl Indexed<'_> {
    fn is_ancestor(&self, a: usize, b: usize) -> bool {
        a < b && b <= self.last_desc[a]
    }

    fn is_left_of(&self, a: usize, b: usize) -> bool {
        a < b && !self.is_ancestor(a, b)
    }
}

fn index(tree: &SchemaTree) -> Indexed<'_> {
    fn walk<'a>(t: &'a SchemaTree, labels: &mut Vec<&'a str>, last: &mut Vec<usize>) {
        let me = labels.len();
        labels.push(&t.label);
        last.push(me);
        for c in &t.children {
            walk(c, labels, last);
        }
        last[me] = labels.len() - 1;
    }
    let mut labels = Vec::new();
    let mut last = Vec::new();
    walk(tree, &mut labels, &mut last);
    Indexed { labels, last_desc: last }
}

/// Minimum edit cost between `a` and `b` by brute force over mappings.
pub fn brute_force_ted(a: &SchemaTree, b: &SchemaTree, costs: &EditCostModel) -> u64 {
    let ia = index(a);
    let ib = index(b);
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    let mut used = vec![false; ib.labels.len()];
    let mut best = u64::MAX;
    search(&ia, &ib, costs, 0, &mut pairs, &mut used, &mut best);
    best
}

fn compatible(ia: &Indexed<'_>, ib: &Indexed<'_>, pairs: &[(usize, usize)], i: usize, j: usize) -> bool {
    pairs.iter().all(|&(i0, j0)| {
        ia.is_ancestor(i0, i) == ib.is_ancestor(j0, j) && ia.is_left_of(i0, i) == ib.is_left_of(j0, j)
    })
}

fn price(ia: &Indexed<'_>, ib: &Indexed<'_>, costs: &EditCostModel, pairs: &[(usize, usize)]) -> u64 {
    let relabel: u64 = pairs.iter().filter(|&&(i, j)| ia.labels[i] != ib.labels[j]).count() as u64 * costs.relabel;
    let deleted = (ia.labels.len() - pairs.len()) as u64 * costs.delete;
    let inserted = (ib.labels.len() - pairs.len()) as u64 * costs.insert;
    relabel + deleted + inserted
}

fn search(
    ia: &Indexed<'_>,
    ib: &Indexed<'_>,
    costs: &EditCostModel,
    i: usize,
    pairs: &mut Vec<(usize, usize)>,
    used: &mut Vec<bool>,
    best: &mut u64,
) {
    if i == ia.labels.len() {
        *best = (*best).min(price(ia, ib, costs, pairs));
        return;
    }
    search(ia, ib, costs, i + 1, pairs, used, best);
    for j in 0..ib.labels.len() {
        if used[j] || !compatible(ia, ib, pairs, i, j) {
            continue;
        }
        used[j] = true;
        pairs.push((i, j));
        search(ia, ib, costs, i + 1, pairs, used, best);
        pairs.pop();
        used[j] = false;
    }
}
