//! Seeded synthetic theory graphs for tests, benchmarks and fixtures.

use std::collections::HashSet;

use crate::graph::{
    EdgeKind, GraphEdge, GraphNode, LoadOptions, TheoryGraph, IMPORT_KIND, VIEW_KIND,
};
use crate::rng::SplitMix64;

fn nodes(n: usize, prefix: &str) -> Vec<GraphNode> {
    (0..n)
        .map(|i| GraphNode {
            id: format!("{prefix}{i}"),
            label: format!("Theory {i}"),
            uri: format!("http://example.org/synthetic?{prefix}{i}"),
            details_url: Some(format!("http://example.org/synthetic/{prefix}{i}.html")),
        })
        .collect()
}

fn edge(i: usize, source: &str, target: &str, kind: &str) -> GraphEdge {
    GraphEdge {
        id: format!("e{i}"),
        source: source.to_owned(),
        target: target.to_owned(),
        kind: kind.to_owned(),
        uri: format!("http://example.org/synthetic?{source}?{kind}?{target}"),
    }
}

/// Random order in which imports may point (earlier -> later).
fn shuffled(n: usize, rng: &mut SplitMix64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.below(i as u64 + 1) as usize;
        order.swap(i, j);
    }
    order
}

/// A DAG of `edge_count` distinct import edges over `node_count` nodes. Edges
/// follow a hidden random topological order. Panics when more edges are
/// requested than the DAG can hold.
pub fn random_dag(node_count: usize, edge_count: usize, seed: u64) -> TheoryGraph {
    assert!(
        edge_count <= node_count * node_count.saturating_sub(1) / 2,
        "too many edges for a simple DAG"
    );
    let mut rng = SplitMix64::new(seed);
    let nodes = nodes(node_count, "t");
    let rank = shuffled(node_count, &mut rng);
    let mut used = HashSet::with_capacity(edge_count);
    let mut edges = Vec::with_capacity(edge_count);
    while edges.len() < edge_count {
        let a = rng.below(node_count as u64) as usize;
        let b = rng.below(node_count as u64) as usize;
        if a == b {
            continue;
        }
        let (lo, hi) = if rank[a] < rank[b] { (a, b) } else { (b, a) };
        if used.insert((lo, hi)) {
            edges.push(edge(edges.len(), &nodes[lo].id, &nodes[hi].id, IMPORT_KIND));
        }
    }
    TheoryGraph::new(nodes, edges, vec![], LoadOptions::default()).expect("generated DAG is valid")
}

/// A library-shaped graph: imports form a DAG that mostly links nearby
/// theories in the hidden order, and the remaining `view_share` of the edges
/// are views between arbitrary pairs in either direction.
pub fn synthetic_library(
    node_count: usize,
    edge_count: usize,
    view_share: f64,
    seed: u64,
) -> TheoryGraph {
    assert!(node_count >= 2 || edge_count == 0, "edges need two nodes");
    let mut rng = SplitMix64::new(seed);
    let nodes = nodes(node_count, "th");
    let rank = shuffled(node_count, &mut rng);
    let mut by_rank = vec![0; node_count];
    for (node, &r) in rank.iter().enumerate() {
        by_rank[r] = node;
    }
    let views = (edge_count as f64 * view_share).round() as usize;
    let imports = edge_count - views;

    let mut used = HashSet::with_capacity(edge_count);
    let mut edges = Vec::with_capacity(edge_count);
    let window = (node_count / 8).max(2) as u64;
    while edges.len() < imports {
        // Target a theory, then import something ranked a short way below it.
        let hi = 1 + rng.below(node_count as u64 - 1) as usize;
        let span = 1 + rng.below(window.min(hi as u64)) as usize;
        let lo = if rng.next_f64() < 0.1 {
            rng.below(hi as u64) as usize
        } else {
            hi - span
        };
        let (s, t) = (by_rank[lo], by_rank[hi]);
        if used.insert((s, t, IMPORT_KIND)) {
            edges.push(edge(edges.len(), &nodes[s].id, &nodes[t].id, IMPORT_KIND));
        }
    }
    while edges.len() < edge_count {
        let s = rng.below(node_count as u64) as usize;
        let t = rng.below(node_count as u64) as usize;
        if s != t && used.insert((s, t, VIEW_KIND)) {
            edges.push(edge(edges.len(), &nodes[s].id, &nodes[t].id, VIEW_KIND));
        }
    }
    TheoryGraph::new(nodes, edges, vec![], LoadOptions::default())
        .expect("generated library is valid")
}

/// Arbitrary digraph with `edge_count` edges (parallel edges allowed, no
/// self-loops), kinds drawn uniformly from `kinds`. Every listed kind is
/// registered even if no edge uses it.
pub fn random_digraph(
    node_count: usize,
    edge_count: usize,
    kinds: &[&str],
    seed: u64,
) -> TheoryGraph {
    assert!(node_count >= 2 || edge_count == 0, "edges need two nodes");
    let mut rng = SplitMix64::new(seed);
    let nodes = nodes(node_count, "v");
    let mut edges = Vec::with_capacity(edge_count);
    while edges.len() < edge_count {
        let s = rng.below(node_count as u64) as usize;
        let t = rng.below(node_count as u64) as usize;
        if s == t {
            continue;
        }
        let kind = kinds[rng.below(kinds.len() as u64) as usize];
        edges.push(edge(edges.len(), &nodes[s].id, &nodes[t].id, kind));
    }
    let declared = kinds.iter().map(|k| EdgeKind::with_defaults(k)).collect();
    TheoryGraph::new(nodes, edges, declared, LoadOptions::default())
        .expect("generated digraph is valid")
}
