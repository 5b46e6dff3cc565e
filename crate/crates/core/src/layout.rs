//! Node positions and the layout file format.

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::LayoutError;
use crate::graph::TheoryGraph;
use crate::params::LayoutParams;
use crate::vec3::Vec3;

/// Positions keyed by node id, in graph node order. `y` is up.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Layout {
    pub positions: IndexMap<String, Vec3>,
    pub iterations_run: usize,
    pub converged: bool,
    pub final_max_displacement: f64,
}

impl Layout {
    pub fn from_points(graph: &TheoryGraph, points: &[Vec3]) -> Self {
        debug_assert_eq!(graph.node_count(), points.len());
        Self {
            positions: graph
                .nodes()
                .iter()
                .zip(points)
                .map(|(n, &p)| (n.id.clone(), p))
                .collect(),
            iterations_run: 0,
            converged: false,
            final_max_displacement: 0.0,
        }
    }

    /// Positions aligned with the graph's node order.
    pub fn points_for(&self, graph: &TheoryGraph) -> Result<Vec<Vec3>, LayoutError> {
        graph
            .nodes()
            .iter()
            .map(|n| {
                self.positions
                    .get(&n.id)
                    .copied()
                    .ok_or_else(|| LayoutError::MissingNode(n.id.clone()))
            })
            .collect()
    }

    pub fn get(&self, id: &str) -> Option<Vec3> {
        self.positions.get(id).copied()
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn centroid(&self) -> Vec3 {
        if self.positions.is_empty() {
            return Vec3::ZERO;
        }
        let mut sum = Vec3::ZERO;
        for p in self.positions.values() {
            sum += *p;
        }
        sum / self.positions.len() as f64
    }

    /// Same layout with only the listed nodes.
    pub fn restrict(&self, node_ids: &[String]) -> Layout {
        Layout {
            positions: node_ids
                .iter()
                .filter_map(|id| self.positions.get(id).map(|p| (id.clone(), *p)))
                .collect(),
            ..self.clone()
        }
    }

    /// Applies `f` to every position, keeping run metadata.
    pub fn map_points(&self, f: impl Fn(Vec3) -> Vec3) -> Layout {
        Layout {
            positions: self
                .positions
                .iter()
                .map(|(id, p)| (id.clone(), f(*p)))
                .collect(),
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LayoutFile {
    pub positions: IndexMap<String, [f64; 3]>,
    pub converged: bool,
    pub iterations: usize,
    #[serde(default)]
    pub final_max_displacement: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<LayoutParams>,
}

impl LayoutFile {
    pub fn new(layout: &Layout, params: Option<&LayoutParams>) -> Self {
        Self {
            positions: layout
                .positions
                .iter()
                .map(|(k, v)| (k.clone(), v.to_array()))
                .collect(),
            converged: layout.converged,
            iterations: layout.iterations_run,
            final_max_displacement: layout.final_max_displacement,
            params: params.cloned(),
        }
    }

    pub fn into_layout(self) -> Result<Layout, LayoutError> {
        let mut positions = IndexMap::with_capacity(self.positions.len());
        for (id, p) in self.positions {
            let v = Vec3::from(p);
            if !v.is_finite() {
                return Err(LayoutError::InvalidParam {
                    field: "positions",
                    reason: format!("non-finite position for `{id}`"),
                });
            }
            positions.insert(id, v);
        }
        Ok(Layout {
            positions,
            iterations_run: self.iterations,
            converged: self.converged,
            final_max_displacement: self.final_max_displacement,
        })
    }
}

pub fn serialize_layout(layout: &Layout, params: Option<&LayoutParams>) -> Vec<u8> {
    let mut out =
        serde_json::to_vec_pretty(&LayoutFile::new(layout, params)).expect("layout serializes");
    out.push(b'\n');
    out
}

pub fn parse_layout(input: &[u8]) -> Result<(Layout, Option<LayoutParams>), LayoutError> {
    let file: LayoutFile =
        serde_json::from_slice(input).map_err(|e| LayoutError::InvalidParam {
            field: "layout",
            reason: e.to_string(),
        })?;
    let params = file.params.clone();
    Ok((file.into_layout()?, params))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_round_trip() {
        let mut layout = Layout::default();
        layout
            .positions
            .insert("a".into(), Vec3::new(1.0, -2.5, 0.1));
        layout
            .positions
            .insert("b".into(), Vec3::new(0.0, 3.0, 1e-17));
        layout.iterations_run = 12;
        layout.converged = true;
        let bytes = serialize_layout(&layout, Some(&LayoutParams::default()));
        let (back, params) = parse_layout(&bytes).unwrap();
        assert_eq!(back, layout);
        assert_eq!(params, Some(LayoutParams::default()));
        let v: serde_json::Value = serde_json::from_slice(&bytes).unwrap();
        assert_eq!(v["iterations"], 12);
        assert_eq!(v["positions"]["a"][1], -2.5);
    }
}
