//! Information filtering and hierarchy-preserving transforms.
//!
//! Every filter returns a [`VisibleSubgraph`] whose edges all have both
//! endpoints visible. Kind filtering hides edges only; reachability,
//! neighbourhood and distance filters hide nodes, and with them every edge
//! that loses an endpoint.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::FilterError;
use crate::graph::TheoryGraph;
use crate::layout::Layout;
use crate::vec3::Vec3;

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct VisibleSubgraph {
    /// Visible node ids in graph order.
    pub visible_nodes: Vec<String>,
    /// Visible edge ids in graph order.
    pub visible_edges: Vec<String>,
}

impl VisibleSubgraph {
    fn from_masks(graph: &TheoryGraph, nodes: &[bool], kinds: &[bool]) -> Self {
        let visible_nodes = graph
            .nodes()
            .iter()
            .zip(nodes)
            .filter(|(_, &on)| on)
            .map(|(n, _)| n.id.clone())
            .collect();
        let visible_edges = graph
            .edges()
            .iter()
            .zip(graph.edge_indices())
            .filter(|(_, e)| kinds[e.kind] && nodes[e.source] && nodes[e.target])
            .map(|(edge, _)| edge.id.clone())
            .collect();
        Self {
            visible_nodes,
            visible_edges,
        }
    }
}

/// Resolves kind names to a mask over the graph's kind registry.
fn kind_mask<S: AsRef<str>>(graph: &TheoryGraph, kinds: &[S]) -> Result<Vec<bool>, FilterError> {
    let mut mask = vec![false; graph.kinds().len()];
    for k in kinds {
        let i = graph
            .kind_index(k.as_ref())
            .ok_or_else(|| FilterError::UnknownKind(k.as_ref().to_owned()))?;
        mask[i] = true;
    }
    Ok(mask)
}

fn node_ix(graph: &TheoryGraph, id: &str) -> Result<usize, FilterError> {
    graph
        .node_index(id)
        .ok_or_else(|| FilterError::UnknownNode(id.to_owned()))
}

/// Every registered kind name.
pub fn all_kinds(graph: &TheoryGraph) -> Vec<String> {
    graph.kinds().map(|k| k.name.clone()).collect()
}

/// Shows edges of the enabled kinds; all nodes stay visible.
pub fn filter_by_kinds<S: AsRef<str>>(
    graph: &TheoryGraph,
    enabled: &[S],
) -> Result<VisibleSubgraph, FilterError> {
    let kinds = kind_mask(graph, enabled)?;
    Ok(VisibleSubgraph::from_masks(
        graph,
        &vec![true; graph.node_count()],
        &kinds,
    ))
}

/// Directed adjacency restricted to `kinds`, optionally reversed, in edge order.
fn adjacency(graph: &TheoryGraph, kinds: &[bool], reversed: bool) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); graph.node_count()];
    for e in graph.edge_indices() {
        if !kinds[e.kind] {
            continue;
        }
        let (from, to) = if reversed {
            (e.target, e.source)
        } else {
            (e.source, e.target)
        };
        adj[from].push(to);
    }
    adj
}

/// Nodes reachable from `start` along edges of the given kinds (against edge
/// direction when `reversed`), plus the edges between them.
pub fn reachable_subgraph<S: AsRef<str>>(
    graph: &TheoryGraph,
    start: &str,
    reversed: bool,
    kinds: &[S],
) -> Result<VisibleSubgraph, FilterError> {
    let start = node_ix(graph, start)?;
    let kinds = kind_mask(graph, kinds)?;
    let adj = adjacency(graph, &kinds, reversed);

    let mut seen = vec![false; graph.node_count()];
    seen[start] = true;
    let mut stack = vec![start];
    while let Some(v) = stack.pop() {
        for &w in &adj[v] {
            if !seen[w] {
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    Ok(VisibleSubgraph::from_masks(graph, &seen, &kinds))
}

/// Nodes within `k` undirected hops of any center, over edges of the given kinds.
pub fn neighborhood_subgraph<S: AsRef<str>, C: AsRef<str>>(
    graph: &TheoryGraph,
    centers: &[C],
    k: usize,
    kinds: &[S],
) -> Result<VisibleSubgraph, FilterError> {
    if centers.is_empty() {
        return Err(FilterError::Invalid(
            "neighborhood needs at least one center".into(),
        ));
    }
    let kinds = kind_mask(graph, kinds)?;
    let mut undirected = vec![Vec::new(); graph.node_count()];
    for e in graph.edge_indices() {
        if kinds[e.kind] {
            undirected[e.source].push(e.target);
            undirected[e.target].push(e.source);
        }
    }

    let mut hops = vec![usize::MAX; graph.node_count()];
    let mut queue = VecDeque::new();
    for c in centers {
        let c = node_ix(graph, c.as_ref())?;
        if hops[c] != 0 {
            hops[c] = 0;
            queue.push_back(c);
        }
    }
    while let Some(v) = queue.pop_front() {
        if hops[v] == k {
            continue;
        }
        for &w in &undirected[v] {
            if hops[w] == usize::MAX {
                hops[w] = hops[v] + 1;
                queue.push_back(w);
            }
        }
    }
    let visible: Vec<bool> = hops.iter().map(|&h| h != usize::MAX).collect();
    Ok(VisibleSubgraph::from_masks(graph, &visible, &kinds))
}

/// Nodes within `radius` of `center` in the given layout; edges of any kind
/// between visible nodes.
pub fn distance_cutoff_filter(
    graph: &TheoryGraph,
    layout: &Layout,
    center: Vec3,
    radius: f64,
) -> Result<VisibleSubgraph, FilterError> {
    if radius.is_nan() || radius <= 0.0 || !center.is_finite() {
        return Err(FilterError::Invalid(format!(
            "cutoff needs a finite center and radius > 0, got {radius}"
        )));
    }
    let points = layout
        .points_for(graph)
        .map_err(|e| FilterError::Invalid(e.to_string()))?;
    let visible: Vec<bool> = points
        .iter()
        .map(|p| p.distance(center) <= radius)
        .collect();
    Ok(VisibleSubgraph::from_masks(
        graph,
        &visible,
        &vec![true; graph.kinds().len()],
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FocusMode {
    Reachable,
    Coreachable,
    Neighborhood,
}

fn default_k() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Focus {
    pub node: String,
    pub mode: FocusMode,
    /// Hop radius, used by `neighborhood` only.
    #[serde(default = "default_k")]
    pub k: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cutoff {
    pub center: Vec3,
    pub radius: f64,
}

/// Declarative combination of all filters. Absent `enabled_kinds` means every
/// kind. Focus traversal uses only enabled kinds; the result is the
/// intersection of every active filter.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct FilterSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub enabled_kinds: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub focus: Option<Focus>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cutoff: Option<Cutoff>,
}

impl FilterSpec {
    /// Checks names against the graph without evaluating anything.
    pub fn check(&self, graph: &TheoryGraph) -> Result<(), FilterError> {
        if let Some(kinds) = &self.enabled_kinds {
            kind_mask(graph, kinds)?;
        }
        if let Some(focus) = &self.focus {
            node_ix(graph, &focus.node)?;
        }
        if let Some(cutoff) = &self.cutoff {
            if cutoff.radius.is_nan() || cutoff.radius <= 0.0 || !cutoff.center.is_finite() {
                return Err(FilterError::Invalid("cutoff radius must be > 0".into()));
            }
        }
        Ok(())
    }
}

pub fn apply_filter(
    graph: &TheoryGraph,
    layout: Option<&Layout>,
    spec: &FilterSpec,
) -> Result<VisibleSubgraph, FilterError> {
    spec.check(graph)?;
    let kinds = spec
        .enabled_kinds
        .clone()
        .unwrap_or_else(|| all_kinds(graph));
    let mut current = filter_by_kinds(graph, &kinds)?;

    if let Some(focus) = &spec.focus {
        let focused = match focus.mode {
            FocusMode::Reachable => reachable_subgraph(graph, &focus.node, false, &kinds)?,
            FocusMode::Coreachable => reachable_subgraph(graph, &focus.node, true, &kinds)?,
            FocusMode::Neighborhood => {
                neighborhood_subgraph(graph, &[&focus.node], focus.k, &kinds)?
            }
        };
        current = intersect(graph, &current, &focused);
    }
    if let Some(cutoff) = &spec.cutoff {
        let layout = layout
            .ok_or_else(|| FilterError::Invalid("a distance cutoff needs a layout".into()))?;
        let near = distance_cutoff_filter(graph, layout, cutoff.center, cutoff.radius)?;
        current = intersect(graph, &current, &near);
    }
    Ok(current)
}

fn intersect(graph: &TheoryGraph, a: &VisibleSubgraph, b: &VisibleSubgraph) -> VisibleSubgraph {
    let mask = |ids: &[String], n: usize, ix: &dyn Fn(&str) -> Option<usize>| {
        let mut m = vec![false; n];
        for id in ids {
            if let Some(i) = ix(id) {
                m[i] = true;
            }
        }
        m
    };
    let n = graph.node_count();
    let m = graph.edge_count();
    let node_ix = |id: &str| graph.node_index(id);
    let edge_ix = |id: &str| graph.edge_index(id);
    let (na, nb) = (
        mask(&a.visible_nodes, n, &node_ix),
        mask(&b.visible_nodes, n, &node_ix),
    );
    let (ea, eb) = (
        mask(&a.visible_edges, m, &edge_ix),
        mask(&b.visible_edges, m, &edge_ix),
    );
    VisibleSubgraph {
        visible_nodes: graph
            .nodes()
            .iter()
            .enumerate()
            .filter(|(i, _)| na[*i] && nb[*i])
            .map(|(_, x)| x.id.clone())
            .collect(),
        visible_edges: graph
            .edges()
            .iter()
            .enumerate()
            .filter(|(i, _)| ea[*i] && eb[*i])
            .map(|(_, x)| x.id.clone())
            .collect(),
    }
}

/// Rotation by `angle` radians about the vertical axis (right-handed, y up):
/// `(x, y, z) -> (x cos a + z sin a, y, -x sin a + z cos a)`. The `y`
/// coordinates are copied unchanged, so vertical order is untouched.
pub fn rotate_about_vertical(layout: &Layout, angle: f64) -> Result<Layout, FilterError> {
    if !angle.is_finite() {
        return Err(FilterError::Invalid(format!(
            "rotation angle must be finite, got {angle}"
        )));
    }
    let (sin, cos) = angle.sin_cos();
    if sin == 0.0 && cos == 1.0 {
        return Ok(layout.clone());
    }
    Ok(layout.map_points(|p| Vec3::new(p.x * cos + p.z * sin, p.y, -p.x * sin + p.z * cos)))
}

/// `p -> pivot + factor * (p - pivot)`: node spacing changes, node sizes do not.
pub fn scale_positions(layout: &Layout, factor: f64, pivot: Vec3) -> Result<Layout, FilterError> {
    if !(factor.is_finite() && factor > 0.0) || !pivot.is_finite() {
        return Err(FilterError::Invalid(format!(
            "scale factor must be finite and > 0, got {factor}"
        )));
    }
    if factor == 1.0 {
        return Ok(layout.clone());
    }
    Ok(layout.map_points(|p| pivot + (p - pivot) * factor))
}
