use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::engine::mean_edge_length;
use crate::error::LayoutError;
use crate::graph::TheoryGraph;
use crate::layout::Layout;
use crate::vec3::Vec3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct BoundingBox {
    pub min: Vec3,
    pub max: Vec3,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LayoutMetrics {
    pub nodes: usize,
    pub edges: usize,
    pub mean_edge_length: f64,
    /// Share of hierarchical edges (positive hierarchy weight) whose target is
    /// strictly above its source.
    pub upward_fraction: f64,
    /// Set when the graph has no hierarchical edges; `upward_fraction` is then 1.
    pub vacuous: bool,
    pub bounding_box: Option<BoundingBox>,
    pub kind_counts: IndexMap<String, usize>,
}

pub fn layout_metrics(graph: &TheoryGraph, layout: &Layout) -> Result<LayoutMetrics, LayoutError> {
    let points = layout.points_for(graph)?;

    let mut hierarchical = 0usize;
    let mut upward = 0usize;
    for e in graph.edge_indices() {
        if graph.kind_at(e.kind).hierarchy_weight > 0.0 {
            hierarchical += 1;
            if points[e.target].y > points[e.source].y {
                upward += 1;
            }
        }
    }

    let bounding_box = points.split_first().map(|(&first, rest)| {
        rest.iter().fold(
            BoundingBox {
                min: first,
                max: first,
            },
            |b, &p| BoundingBox {
                min: b.min.min(p),
                max: b.max.max(p),
            },
        )
    });

    Ok(LayoutMetrics {
        nodes: graph.node_count(),
        edges: graph.edge_count(),
        mean_edge_length: mean_edge_length(graph, &points),
        upward_fraction: if hierarchical == 0 {
            1.0
        } else {
            upward as f64 / hierarchical as f64
        },
        vacuous: hierarchical == 0,
        bounding_box,
        kind_counts: graph.kind_counts(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{parse_graph, LoadOptions};

    fn two(kind: &str) -> TheoryGraph {
        let s = format!(
            r#"{{"nodes":[{{"id":"a","uri":"u"}},{{"id":"b","uri":"v"}}],
                "edges":[{{"id":"e","from":"a","to":"b","kind":"{kind}","uri":"w"}}]}}"#
        );
        parse_graph(s.as_bytes(), &LoadOptions::default()).unwrap()
    }

    fn place(g: &TheoryGraph, a: Vec3, b: Vec3) -> Layout {
        Layout::from_points(g, &[a, b])
    }

    #[test]
    fn downward_import() {
        let g = two("import");
        let m = layout_metrics(&g, &place(&g, Vec3::UP, Vec3::ZERO)).unwrap();
        assert_eq!(m.upward_fraction, 0.0);
        assert!(!m.vacuous);
        assert_eq!(m.mean_edge_length, 1.0);
    }

    #[test]
    fn no_hierarchical_edges_is_vacuous() {
        let g = two("view");
        let m = layout_metrics(&g, &place(&g, Vec3::UP, Vec3::ZERO)).unwrap();
        assert_eq!(m.upward_fraction, 1.0);
        assert!(m.vacuous);
        assert_eq!(m.kind_counts["view"], 1);
    }

    #[test]
    fn bounding_box() {
        let g = two("import");
        let m = layout_metrics(
            &g,
            &place(&g, Vec3::new(-1.0, 2.0, 0.5), Vec3::new(3.0, -4.0, 0.0)),
        )
        .unwrap();
        let b = m.bounding_box.unwrap();
        assert_eq!(b.min, Vec3::new(-1.0, -4.0, 0.0));
        assert_eq!(b.max, Vec3::new(3.0, 2.0, 0.5));
    }
}
