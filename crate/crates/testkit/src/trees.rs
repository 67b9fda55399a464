use rand::Rng;
use shexgen_core::SchemaTree;

/// Random ordered tree with `1..=max_nodes` nodes over a small alphabet.
pub fn random_tree<R: Rng>(rng: &mut R, max_nodes: usize, alphabet: &[&str]) -> SchemaTree {
    let n = rng.gen_range(1..=max_nodes);
    // parent[k] < k, so children lists built in index order are well ordered.
    let parents: Vec<usize> = (1..n).map(|k| rng.gen_range(0..k)).collect();
    let labels: Vec<&str> = (0..n).map(|_| alphabet[rng.gen_range(0..alphabet.len())]).collect();
    build(0, &parents, &labels)
}

fn build(node: usize, parents: &[usize], labels: &[&str]) -> SchemaTree {
    let children = parents
        .iter()
        .enumerate()
        .filter(|(_, &p)| p == node)
        .map(|(k, _)| build(k + 1, parents, labels))
        .collect();
    SchemaTree::node(labels[node], children)
}
