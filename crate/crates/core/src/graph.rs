//! Theory-graph data model, the JSON graph file format, and structural validation.
//!
//! A graph file looks like:
//!
//! ```json
//! {
//!   "kinds": [{"name": "import", "color": [64, 64, 255], "hierarchyWeight": 1.0}],
//!   "nodes": [{"id": "a", "label": "A", "uri": "http://example.org/?A"}],
//!   "edges": [{"id": "e1", "from": "a", "to": "b", "kind": "import", "uri": "..."}]
//! }
//! ```
//!
//! `kinds` is optional. Kinds used by edges but not declared are registered
//! with defaults (see [`EdgeKind::with_defaults`]). Unknown keys are ignored.

use std::collections::HashMap;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::GraphError;

pub const IMPORT_KIND: &str = "import";
pub const VIEW_KIND: &str = "view";

const IMPORT_COLOR: [u8; 3] = [64, 64, 255];
const VIEW_COLOR: [u8; 3] = [255, 140, 0];

const PALETTE: [[u8; 3]; 8] = [
    [46, 160, 67],
    [214, 39, 40],
    [148, 103, 189],
    [140, 86, 75],
    [227, 119, 194],
    [23, 190, 207],
    [188, 189, 34],
    [127, 127, 127],
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphNode {
    pub id: String,
    pub label: String,
    pub uri: String,
    pub details_url: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeKind {
    pub name: String,
    pub color: [u8; 3],
    /// Scales the vertical hierarchy force contributed by edges of this kind.
    pub hierarchy_weight: f64,
    pub attraction_weight: f64,
    /// Whether edges of this kind must form a DAG.
    pub validate_acyclic: bool,
}

impl EdgeKind {
    /// `import` is hierarchical and must be acyclic; everything else behaves like `view`.
    pub fn with_defaults(name: &str) -> Self {
        match name {
            IMPORT_KIND => Self {
                name: name.to_owned(),
                color: IMPORT_COLOR,
                hierarchy_weight: 1.0,
                attraction_weight: 1.0,
                validate_acyclic: true,
            },
            VIEW_KIND => Self {
                name: name.to_owned(),
                color: VIEW_COLOR,
                hierarchy_weight: 0.0,
                attraction_weight: 1.0,
                validate_acyclic: false,
            },
            other => Self {
                name: other.to_owned(),
                color: palette_color(other),
                hierarchy_weight: 0.0,
                attraction_weight: 1.0,
                validate_acyclic: false,
            },
        }
    }
}

/// FNV-1a of the name, reduced into the fixed palette.
fn palette_color(name: &str) -> [u8; 3] {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in name.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    PALETTE[(h % PALETTE.len() as u64) as usize]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphEdge {
    pub id: String,
    pub source: String,
    pub target: String,
    pub kind: String,
    pub uri: String,
}

/// Edge endpoints and kind resolved to dense indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EdgeIx {
    pub source: usize,
    pub target: usize,
    pub kind: usize,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct LoadOptions {
    pub allow_self_loops: bool,
}

/// An immutable typed directed graph. Node, edge and kind order is the order
/// in which they were supplied; every index-based accessor uses that order.
#[derive(Debug, Clone)]
pub struct TheoryGraph {
    nodes: Vec<GraphNode>,
    edges: Vec<GraphEdge>,
    kinds: IndexMap<String, EdgeKind>,
    node_index: HashMap<String, usize>,
    edge_index: HashMap<String, usize>,
    resolved: Vec<EdgeIx>,
}

impl TheoryGraph {
    pub fn empty() -> Self {
        Self {
            nodes: Vec::new(),
            edges: Vec::new(),
            kinds: IndexMap::new(),
            node_index: HashMap::new(),
            edge_index: HashMap::new(),
            resolved: Vec::new(),
        }
    }

    /// Builds a graph, checking every structural invariant. Kinds named by
    /// edges but absent from `kinds` are registered with defaults.
    pub fn new(
        nodes: Vec<GraphNode>,
        edges: Vec<GraphEdge>,
        kinds: Vec<EdgeKind>,
        options: LoadOptions,
    ) -> Result<Self, GraphError> {
        let mut registry = IndexMap::with_capacity(kinds.len() + 2);
        for kind in kinds {
            check_kind(&kind)?;
            if registry.contains_key(&kind.name) {
                return Err(GraphError::DuplicateKind(kind.name));
            }
            registry.insert(kind.name.clone(), kind);
        }

        let mut node_index = HashMap::with_capacity(nodes.len());
        for (i, node) in nodes.iter().enumerate() {
            if node.id.is_empty() {
                return Err(GraphError::InvalidField {
                    id: format!("node #{i}"),
                    field: "id",
                    reason: "must be non-empty".into(),
                });
            }
            if node.uri.is_empty() {
                return Err(GraphError::InvalidField {
                    id: node.id.clone(),
                    field: "uri",
                    reason: "must be non-empty".into(),
                });
            }
            if node_index.insert(node.id.clone(), i).is_some() {
                return Err(GraphError::DuplicateNode(node.id.clone()));
            }
        }

        let mut edge_index = HashMap::with_capacity(edges.len());
        let mut resolved = Vec::with_capacity(edges.len());
        for (i, edge) in edges.iter().enumerate() {
            if edge.id.is_empty() {
                return Err(GraphError::InvalidField {
                    id: format!("edge #{i}"),
                    field: "id",
                    reason: "must be non-empty".into(),
                });
            }
            if edge_index.insert(edge.id.clone(), i).is_some() {
                return Err(GraphError::DuplicateEdge(edge.id.clone()));
            }
            let endpoint = |node: &str| {
                node_index
                    .get(node)
                    .copied()
                    .ok_or_else(|| GraphError::DanglingEndpoint {
                        edge: edge.id.clone(),
                        node: node.to_owned(),
                    })
            };
            let source = endpoint(&edge.source)?;
            let target = endpoint(&edge.target)?;
            if source == target && !options.allow_self_loops {
                return Err(GraphError::SelfLoop(edge.id.clone()));
            }
            if edge.kind.is_empty() {
                return Err(GraphError::InvalidField {
                    id: edge.id.clone(),
                    field: "kind",
                    reason: "must be non-empty".into(),
                });
            }
            if !registry.contains_key(&edge.kind) {
                registry.insert(edge.kind.clone(), EdgeKind::with_defaults(&edge.kind));
            }
            let kind = registry.get_index_of(&edge.kind).expect("registered above");
            resolved.push(EdgeIx {
                source,
                target,
                kind,
            });
        }

        Ok(Self {
            nodes,
            edges,
            kinds: registry,
            node_index,
            edge_index,
            resolved,
        })
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn nodes(&self) -> &[GraphNode] {
        &self.nodes
    }

    pub fn edges(&self) -> &[GraphEdge] {
        &self.edges
    }

    pub fn kinds(&self) -> impl ExactSizeIterator<Item = &EdgeKind> {
        self.kinds.values()
    }

    pub fn kind(&self, name: &str) -> Option<&EdgeKind> {
        self.kinds.get(name)
    }

    pub fn kind_at(&self, index: usize) -> &EdgeKind {
        &self.kinds[index]
    }

    pub fn kind_index(&self, name: &str) -> Option<usize> {
        self.kinds.get_index_of(name)
    }

    pub fn node_index(&self, id: &str) -> Option<usize> {
        self.node_index.get(id).copied()
    }

    pub fn edge_index(&self, id: &str) -> Option<usize> {
        self.edge_index.get(id).copied()
    }

    pub fn node(&self, id: &str) -> Option<&GraphNode> {
        self.node_index(id).map(|i| &self.nodes[i])
    }

    /// Resolved endpoints of every edge, aligned with [`TheoryGraph::edges`].
    pub fn edge_indices(&self) -> &[EdgeIx] {
        &self.resolved
    }

    /// Per-kind edge counts in registry order.
    pub fn kind_counts(&self) -> IndexMap<String, usize> {
        let mut counts: IndexMap<String, usize> =
            self.kinds.keys().map(|k| (k.clone(), 0)).collect();
        for e in &self.resolved {
            counts[e.kind] += 1;
        }
        counts
    }

    /// Keeps the listed nodes and edges. Kinds are retained so colors and
    /// weights survive a round trip through a filtered file.
    pub fn restrict(&self, node_ids: &[String], edge_ids: &[String]) -> TheoryGraph {
        let nodes = node_ids
            .iter()
            .filter_map(|id| self.node(id).cloned())
            .collect();
        let edges = edge_ids
            .iter()
            .filter_map(|id| self.edge_index(id).map(|i| self.edges[i].clone()))
            .collect();
        TheoryGraph::new(
            nodes,
            edges,
            self.kinds.values().cloned().collect(),
            LoadOptions {
                allow_self_loops: true,
            },
        )
        .expect("subset of a valid graph is valid")
    }

    /// Same node, edge and kind sets, ignoring order.
    pub fn structurally_eq(&self, other: &TheoryGraph) -> bool {
        fn sorted<T: Clone, K: Ord>(items: &[T], key: impl Fn(&T) -> K) -> Vec<T> {
            let mut v = items.to_vec();
            v.sort_by_key(|x| key(x));
            v
        }
        let kinds_a: Vec<EdgeKind> = self.kinds.values().cloned().collect();
        let kinds_b: Vec<EdgeKind> = other.kinds.values().cloned().collect();
        sorted(&self.nodes, |n| n.id.clone()) == sorted(&other.nodes, |n| n.id.clone())
            && sorted(&self.edges, |e| e.id.clone()) == sorted(&other.edges, |e| e.id.clone())
            && sorted(&kinds_a, |k| k.name.clone()) == sorted(&kinds_b, |k| k.name.clone())
    }
}

fn check_kind(kind: &EdgeKind) -> Result<(), GraphError> {
    if kind.name.is_empty() {
        return Err(GraphError::InvalidField {
            id: "kind".into(),
            field: "name",
            reason: "must be non-empty".into(),
        });
    }
    for (field, w) in [
        ("hierarchyWeight", kind.hierarchy_weight),
        ("attractionWeight", kind.attraction_weight),
    ] {
        if !w.is_finite() || w < 0.0 {
            return Err(GraphError::InvalidField {
                id: kind.name.clone(),
                field,
                reason: format!("must be finite and non-negative, got {w}"),
            });
        }
    }
    Ok(())
}

// Wire format.

#[derive(Debug, Default, Serialize, Deserialize)]
struct GraphDoc {
    #[serde(default)]
    kinds: Vec<KindDoc>,
    #[serde(default)]
    nodes: Vec<NodeDoc>,
    #[serde(default)]
    edges: Vec<EdgeDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct KindDoc {
    name: String,
    #[serde(default)]
    color: Option<[u8; 3]>,
    #[serde(default)]
    hierarchy_weight: Option<f64>,
    #[serde(default)]
    attraction_weight: Option<f64>,
    #[serde(default)]
    validate_acyclic: Option<bool>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct NodeDoc {
    id: String,
    #[serde(default)]
    label: Option<String>,
    uri: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    details_url: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
struct EdgeDoc {
    id: String,
    from: String,
    to: String,
    kind: String,
    uri: String,
}

/// Parses a UTF-8 JSON graph document.
pub fn parse_graph(input: &[u8], options: &LoadOptions) -> Result<TheoryGraph, GraphError> {
    let doc: GraphDoc = serde_json::from_slice(input).map_err(|e| GraphError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;

    let kinds = doc
        .kinds
        .into_iter()
        .map(|k| {
            let base = EdgeKind::with_defaults(&k.name);
            EdgeKind {
                color: k.color.unwrap_or(base.color),
                hierarchy_weight: k.hierarchy_weight.unwrap_or(base.hierarchy_weight),
                attraction_weight: k.attraction_weight.unwrap_or(base.attraction_weight),
                validate_acyclic: k.validate_acyclic.unwrap_or(base.validate_acyclic),
                name: k.name,
            }
        })
        .collect();
    let nodes = doc
        .nodes
        .into_iter()
        .map(|n| GraphNode {
            label: n.label.unwrap_or_else(|| n.id.clone()),
            id: n.id,
            uri: n.uri,
            details_url: n.details_url,
        })
        .collect();
    let edges = doc
        .edges
        .into_iter()
        .map(|e| GraphEdge {
            id: e.id,
            source: e.from,
            target: e.to,
            kind: e.kind,
            uri: e.uri,
        })
        .collect();
    TheoryGraph::new(nodes, edges, kinds, *options)
}

fn to_doc(graph: &TheoryGraph) -> GraphDoc {
    GraphDoc {
        kinds: graph
            .kinds()
            .map(|k| KindDoc {
                name: k.name.clone(),
                color: Some(k.color),
                hierarchy_weight: Some(k.hierarchy_weight),
                attraction_weight: Some(k.attraction_weight),
                validate_acyclic: Some(k.validate_acyclic),
            })
            .collect(),
        nodes: graph
            .nodes()
            .iter()
            .map(|n| NodeDoc {
                id: n.id.clone(),
                label: Some(n.label.clone()),
                uri: n.uri.clone(),
                details_url: n.details_url.clone(),
            })
            .collect(),
        edges: graph
            .edges()
            .iter()
            .map(|e| EdgeDoc {
                id: e.id.clone(),
                from: e.source.clone(),
                to: e.target.clone(),
                kind: e.kind.clone(),
                uri: e.uri.clone(),
            })
            .collect(),
    }
}

/// Serializes to the graph file format. All kinds are written with explicit
/// styles and weights so the document is self-describing.
pub fn serialize_graph(graph: &TheoryGraph) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(&to_doc(graph)).expect("graph document serializes");
    out.push(b'\n');
    out
}

/// The graph document as a JSON value (used by the HTTP service).
pub fn graph_to_json(graph: &TheoryGraph) -> serde_json::Value {
    serde_json::to_value(to_doc(graph)).expect("graph document serializes")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Finding {
    pub code: String,
    pub message: String,
    pub id: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub errors: Vec<Finding>,
    pub warnings: Vec<Finding>,
    pub import_dag_ok: bool,
    /// A closed directed walk `[v0, v1, ..., v0]` through hierarchy-validated edges.
    pub cycle_witness: Option<Vec<String>>,
}

impl ValidationReport {
    /// Report for input that could not be loaded at all.
    pub fn from_load_error(err: &GraphError) -> Self {
        Self {
            errors: vec![Finding {
                code: err.code().to_owned(),
                message: err.to_string(),
                id: err.offending_id().map(str::to_owned),
            }],
            warnings: Vec::new(),
            import_dag_ok: true,
            cycle_witness: None,
        }
    }

    pub fn is_ok(&self) -> bool {
        self.errors.is_empty()
    }
}

/// Checks that the subgraph of edges whose kind has `validate_acyclic` set is
/// a DAG. A cycle is reported as a warning with a witness; it never fails.
pub fn validate(graph: &TheoryGraph) -> ValidationReport {
    let mut warnings = Vec::new();
    let witness = find_cycle(graph);
    if let Some(cycle) = &witness {
        warnings.push(Finding {
            code: "import_cycle".into(),
            message: format!(
                "hierarchy edges contain a directed cycle: {}",
                cycle.join(" -> ")
            ),
            id: cycle.first().cloned(),
        });
    }
    let isolated = isolated_nodes(graph);
    if !isolated.is_empty() {
        warnings.push(Finding {
            code: "isolated_nodes".into(),
            message: format!("{} node(s) have no incident edges", isolated.len()),
            id: isolated.first().cloned(),
        });
    }
    ValidationReport {
        errors: Vec::new(),
        warnings,
        import_dag_ok: witness.is_none(),
        cycle_witness: witness,
    }
}

fn isolated_nodes(graph: &TheoryGraph) -> Vec<String> {
    let mut degree = vec![0usize; graph.node_count()];
    for e in graph.edge_indices() {
        degree[e.source] += 1;
        degree[e.target] += 1;
    }
    degree
        .iter()
        .zip(graph.nodes())
        .filter(|(d, _)| **d == 0)
        .map(|(_, n)| n.id.clone())
        .collect()
}

/// Iterative three-colour DFS over hierarchy-validated edges, roots visited in
/// node order so the witness is deterministic.
fn find_cycle(graph: &TheoryGraph) -> Option<Vec<String>> {
    let n = graph.node_count();
    let mut succ: Vec<Vec<usize>> = vec![Vec::new(); n];
    for e in graph.edge_indices() {
        if graph.kind_at(e.kind).validate_acyclic {
            succ[e.source].push(e.target);
        }
    }

    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        White,
        Grey,
        Black,
    }
    let mut mark = vec![Mark::White; n];
    // (node, next successor slot)
    let mut stack: Vec<(usize, usize)> = Vec::new();

    for root in 0..n {
        if mark[root] != Mark::White {
            continue;
        }
        mark[root] = Mark::Grey;
        stack.push((root, 0));
        while let Some(top) = stack.last_mut() {
            let v = top.0;
            if let Some(&w) = succ[v].get(top.1) {
                top.1 += 1;
                match mark[w] {
                    Mark::White => {
                        mark[w] = Mark::Grey;
                        stack.push((w, 0));
                    }
                    Mark::Grey => {
                        let start = stack
                            .iter()
                            .position(|&(u, _)| u == w)
                            .expect("grey node is on the stack");
                        let mut cycle: Vec<String> = stack[start..]
                            .iter()
                            .map(|&(u, _)| graph.nodes[u].id.clone())
                            .collect();
                        cycle.push(graph.nodes[w].id.clone());
                        return Some(cycle);
                    }
                    Mark::Black => {}
                }
            } else {
                mark[v] = Mark::Black;
                stack.pop();
            }
        }
    }
    None
}
