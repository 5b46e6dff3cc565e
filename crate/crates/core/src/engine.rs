//! Hierarchical force-directed layout.
//!
//! Every node is pulled toward its neighbours (edge direction ignored), pushed
//! away from every other node, and each hierarchical edge pushes its source
//! down and its target up by a constant amount. With `d = max(|p_u - p_v|,
//! min_distance)` and `u_hat` the unit vector from `v` toward `u`:
//!
//! ```text
//! attract(v)   = sum_{edges {u,v}}  w_attract(kind) * k_attract * d^2 / L * u_hat
//! repel(v)     = sum_{u != v}       k_repel * L^2 / d * (-u_hat)
//! hierarchy(v) = sum_{edges at v}   k_hierarchy * w_hierarchy(kind) * (+y if v is target, -y if source)
//! ```
//!
//! Updates are synchronous: all forces of an iteration are evaluated against
//! the previous positions, then each node moves along its net force by at most
//! `temperature * L`. Per-node sums use a fixed order, so results do not
//! depend on how nodes are distributed over worker threads.

use std::collections::HashSet;
use std::ops::ControlFlow;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::error::LayoutError;
use crate::graph::TheoryGraph;
use crate::layout::Layout;
use crate::octree::{OctreeIndex, RepulsionKernel};
use crate::params::LayoutParams;
use crate::rng::SplitMix64;
use crate::vec3::Vec3;

const JITTER: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    /// Data-parallel force evaluation on the current rayon pool. Without the
    /// `parallel` feature this runs sequentially.
    #[default]
    Parallel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RepulsionMode {
    /// Octree traversal with the `theta` opening criterion.
    #[default]
    BarnesHut,
    /// Direct O(n^2) sum, ignoring `theta`.
    Naive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct EngineOptions {
    pub execution: Execution,
    pub repulsion: RepulsionMode,
}

impl EngineOptions {
    pub fn sequential() -> Self {
        Self {
            execution: Execution::Sequential,
            ..Self::default()
        }
    }
}

/// The three force components acting on one node.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NodeForces {
    pub attract: Vec3,
    pub repel: Vec3,
    pub hierarchy: Vec3,
}

impl NodeForces {
    pub fn net(&self) -> Vec3 {
        self.attract + self.repel + self.hierarchy
    }
}

#[derive(Debug, Clone, Copy)]
struct Incident {
    other: usize,
    attraction: f64,
    /// Signed vertical push on this node: positive when it is the edge target.
    lift: f64,
}

/// Graph structure and constants prepared once per run.
struct ForceModel {
    incidence: Vec<Vec<Incident>>,
    kernel: RepulsionKernel,
    k_attract: f64,
    ideal_length: f64,
    theta: f64,
    options: EngineOptions,
}

impl ForceModel {
    fn new(graph: &TheoryGraph, params: &LayoutParams, options: EngineOptions) -> Self {
        let mut incidence = vec![Vec::new(); graph.node_count()];
        for e in graph.edge_indices() {
            if e.source == e.target {
                continue;
            }
            let kind = graph.kind_at(e.kind);
            let push = params.k_hierarchy * kind.hierarchy_weight;
            incidence[e.source].push(Incident {
                other: e.target,
                attraction: kind.attraction_weight,
                lift: -push,
            });
            incidence[e.target].push(Incident {
                other: e.source,
                attraction: kind.attraction_weight,
                lift: push,
            });
        }
        Self {
            incidence,
            kernel: RepulsionKernel {
                k_repel: params.k_repel,
                ideal_length: params.ideal_edge_length,
                min_distance: params.min_distance,
            },
            k_attract: params.k_attract,
            ideal_length: params.ideal_edge_length,
            theta: params.theta,
            options,
        }
    }

    fn forces(&self, points: &[Vec3]) -> Result<Vec<NodeForces>, LayoutError> {
        if points.is_empty() {
            return Ok(Vec::new());
        }
        let tree = match self.options.repulsion {
            RepulsionMode::BarnesHut => Some(OctreeIndex::build(points)?),
            RepulsionMode::Naive => None,
        };
        let eval = |v: usize| -> NodeForces {
            let p = points[v];
            let mut attract = Vec3::ZERO;
            let mut lift = 0.0;
            for inc in &self.incidence[v] {
                let delta = points[inc.other] - p;
                let dist = delta.norm();
                if dist > 0.0 && inc.attraction > 0.0 {
                    let d = dist.max(self.kernel.min_distance);
                    attract += delta
                        * (inc.attraction * self.k_attract * d * d / (self.ideal_length * dist));
                }
                lift += inc.lift;
            }
            let repel = match &tree {
                Some(tree) => tree.repulsion_on(v, self.theta, &self.kernel),
                None => {
                    let mut f = Vec3::ZERO;
                    for (u, &q) in points.iter().enumerate() {
                        if u != v {
                            f += self.kernel.force(p, q, 1.0);
                        }
                    }
                    f
                }
            };
            NodeForces {
                attract,
                repel,
                hierarchy: Vec3::new(0.0, lift, 0.0),
            }
        };
        Ok(map_nodes(points.len(), self.options.execution, eval))
    }

    /// One synchronous update in place. Returns the largest displacement.
    fn advance(
        &self,
        graph: &TheoryGraph,
        points: &mut [Vec3],
        temperature: f64,
    ) -> Result<f64, LayoutError> {
        let forces = self.forces(points)?;
        let cap = temperature * self.ideal_length;
        let mut max_move: f64 = 0.0;
        for (v, f) in forces.iter().enumerate() {
            let net = f.net();
            if !net.is_finite() {
                return Err(LayoutError::NonFiniteForce(graph.nodes()[v].id.clone()));
            }
            let mag = net.norm();
            if mag > 0.0 {
                let step = net * (mag.min(cap) / mag);
                points[v] += step;
                max_move = max_move.max(step.norm());
            }
        }
        Ok(max_move)
    }
}

fn map_nodes<T, F>(n: usize, execution: Execution, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match execution {
        #[cfg(feature = "parallel")]
        Execution::Parallel => (0..n).into_par_iter().map(f).collect(),
        _ => (0..n).map(f).collect(),
    }
}

/// Radius of the initial placement ball, `L * cbrt(|V|)`.
pub fn initial_radius(node_count: usize, params: &LayoutParams) -> f64 {
    params.ideal_edge_length * (node_count as f64).cbrt()
}

/// Uniform random positions in the ball of radius [`initial_radius`], drawn
/// from SplitMix64 seeded with `params.seed` by rejection from the enclosing
/// cube (three draws per candidate, in x, y, z order). Exact duplicates are
/// moved apart by `1e-4 * L` in a random direction.
pub fn initial_placement(graph: &TheoryGraph, params: &LayoutParams) -> Layout {
    Layout::from_points(graph, &initial_points(graph.node_count(), params))
}

fn initial_points(n: usize, params: &LayoutParams) -> Vec<Vec3> {
    let radius = initial_radius(n, params);
    let mut rng = SplitMix64::new(params.seed);
    let mut points: Vec<Vec3> = (0..n)
        .map(|_| loop {
            let c = Vec3::new(
                rng.uniform(-1.0, 1.0),
                rng.uniform(-1.0, 1.0),
                rng.uniform(-1.0, 1.0),
            );
            if c.norm_squared() <= 1.0 {
                break c * radius;
            }
        })
        .collect();

    let key = |p: Vec3| (p.x.to_bits(), p.y.to_bits(), p.z.to_bits());
    let mut seen = HashSet::with_capacity(n);
    for p in points.iter_mut() {
        while !seen.insert(key(*p)) {
            let dir = loop {
                let c = Vec3::new(
                    rng.uniform(-1.0, 1.0),
                    rng.uniform(-1.0, 1.0),
                    rng.uniform(-1.0, 1.0),
                );
                let n2 = c.norm_squared();
                if n2 > 1e-12 && n2 <= 1.0 {
                    break c / n2.sqrt();
                }
            };
            *p += dir * (JITTER * params.ideal_edge_length);
        }
    }
    points
}

/// Force components on every node of `layout`, in graph node order.
pub fn node_forces(
    graph: &TheoryGraph,
    layout: &Layout,
    params: &LayoutParams,
    options: EngineOptions,
) -> Result<Vec<NodeForces>, LayoutError> {
    params.validate()?;
    let points = layout.points_for(graph)?;
    ForceModel::new(graph, params, options).forces(&points)
}

/// One synchronous iteration at the given temperature.
pub fn step(
    graph: &TheoryGraph,
    layout: &Layout,
    params: &LayoutParams,
    temperature: f64,
    options: EngineOptions,
) -> Result<(Layout, f64), LayoutError> {
    params.validate()?;
    if !(temperature.is_finite() && temperature > 0.0) {
        return Err(LayoutError::InvalidParam {
            field: "temperature",
            reason: format!("must be finite and > 0, got {temperature}"),
        });
    }
    let mut points = layout.points_for(graph)?;
    let model = ForceModel::new(graph, params, options);
    let max_move = model.advance(graph, &mut points, temperature)?;
    let mut next = Layout::from_points(graph, &points);
    next.iterations_run = layout.iterations_run + 1;
    next.final_max_displacement = max_move;
    Ok((next, max_move))
}

/// What a progress callback sees after each iteration.
pub struct ProgressEvent<'a> {
    pub iteration: usize,
    pub max_displacement: f64,
    pub mean_edge_length: f64,
    pub temperature: f64,
    graph: &'a TheoryGraph,
    points: &'a [Vec3],
}

impl ProgressEvent<'_> {
    /// Current positions translated so the centroid is at the origin.
    pub fn snapshot(&self) -> Layout {
        let mut layout = Layout::from_points(self.graph, &recentered(self.points));
        layout.iterations_run = self.iteration;
        layout.final_max_displacement = self.max_displacement;
        layout
    }

    pub fn to_progress(&self, with_snapshot: bool) -> LayoutProgress {
        LayoutProgress {
            iteration: self.iteration,
            max_displacement: self.max_displacement,
            mean_edge_length: self.mean_edge_length,
            snapshot: with_snapshot.then(|| self.snapshot()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayoutProgress {
    pub iteration: usize,
    pub max_displacement: f64,
    pub mean_edge_length: f64,
    pub snapshot: Option<Layout>,
}

pub fn mean_edge_length(graph: &TheoryGraph, points: &[Vec3]) -> f64 {
    let edges = graph.edge_indices();
    if edges.is_empty() {
        return 0.0;
    }
    let total: f64 = edges
        .iter()
        .map(|e| points[e.source].distance(points[e.target]))
        .sum();
    total / edges.len() as f64
}

fn recentered(points: &[Vec3]) -> Vec<Vec3> {
    if points.is_empty() {
        return Vec::new();
    }
    let mut sum = Vec3::ZERO;
    for &p in points {
        sum += p;
    }
    let c = sum / points.len() as f64;
    points.iter().map(|&p| p - c).collect()
}

/// Per-iteration observer; `Break` stops the run.
pub type ProgressCallback<'c> = &'c mut dyn FnMut(&ProgressEvent<'_>) -> ControlFlow<()>;

/// Runs the layout to convergence or `max_iterations`.
///
/// Temperature starts at `initial_temperature * R0` (the placement radius) and
/// is multiplied by `cooling_factor` after every iteration. The run converges
/// once an iteration's largest move is below `convergence_eps * L`. The
/// callback runs after every iteration on the calling thread; returning
/// `ControlFlow::Break` stops the run early (the layout is returned with
/// `converged = false`). The result is translated to a zero centroid.
pub fn run_layout(
    graph: &TheoryGraph,
    params: &LayoutParams,
    options: EngineOptions,
    on_progress: Option<ProgressCallback<'_>>,
) -> Result<Layout, LayoutError> {
    params.validate()?;
    let n = graph.node_count();
    if n == 0 {
        return Ok(Layout {
            converged: true,
            ..Layout::default()
        });
    }

    run_from_points(
        graph,
        initial_points(n, params),
        params,
        options,
        on_progress,
    )
}

/// Like [`run_layout`], starting from the given positions instead of the
/// seeded placement. The cooling schedule still starts at
/// `initial_temperature * R0`.
pub fn run_layout_from(
    graph: &TheoryGraph,
    initial: &Layout,
    params: &LayoutParams,
    options: EngineOptions,
    on_progress: Option<ProgressCallback<'_>>,
) -> Result<Layout, LayoutError> {
    params.validate()?;
    if graph.node_count() == 0 {
        return Ok(Layout {
            converged: true,
            ..Layout::default()
        });
    }
    let points = initial.points_for(graph)?;
    run_from_points(graph, points, params, options, on_progress)
}

fn run_from_points(
    graph: &TheoryGraph,
    mut points: Vec<Vec3>,
    params: &LayoutParams,
    options: EngineOptions,
    mut on_progress: Option<ProgressCallback<'_>>,
) -> Result<Layout, LayoutError> {
    let n = points.len();
    let model = ForceModel::new(graph, params, options);
    let mut temperature = params.initial_temperature * initial_radius(n, params);
    let threshold = params.convergence_eps * params.ideal_edge_length;

    let mut iterations = 0;
    let mut converged = false;
    let mut last_move = 0.0;
    for iteration in 1..=params.max_iterations {
        last_move = model.advance(graph, &mut points, temperature)?;
        iterations = iteration;
        if let Some(cb) = on_progress.as_mut() {
            let event = ProgressEvent {
                iteration,
                max_displacement: last_move,
                mean_edge_length: mean_edge_length(graph, &points),
                temperature,
                graph,
                points: &points,
            };
            if cb(&event).is_break() {
                break;
            }
        }
        if last_move < threshold {
            converged = true;
            break;
        }
        temperature *= params.cooling_factor;
    }

    let mut layout = Layout::from_points(graph, &recentered(&points));
    layout.iterations_run = iterations;
    layout.converged = converged;
    layout.final_max_displacement = last_move;
    Ok(layout)
}
