//! Acceptance suite. Prints one PASS/FAIL line per criterion and fails if any
//! criterion fails. Run with `--nocapture` to see the report.
//!
//! Expected values come from small oracles written here from the definitions
//! (brute-force forces, BFS, direct metric sums), not from library helpers.

use std::collections::{HashMap, HashSet, VecDeque};
use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use tgforge_core::engine::{initial_placement, node_forces, step};
use tgforge_core::generate::{random_dag, random_digraph, synthetic_library};
use tgforge_core::graph::{parse_graph, serialize_graph, validate, LoadOptions, TheoryGraph};
use tgforge_core::ops::{
    neighborhood_subgraph, reachable_subgraph, rotate_about_vertical, scale_positions,
};
use tgforge_core::{run_layout, EngineOptions, Layout, LayoutParams, Vec3};

type P = [f64; 3];

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
}

/// Independent SplitMix64, used to regenerate placements and test data.
struct Mix(u64);

impl Mix {
    fn next(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    fn unit(&mut self) -> f64 {
        (self.next() >> 11) as f64 / (1u64 << 53) as f64
    }

    fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.unit()
    }

    fn cloud(&mut self, n: usize, half: f64) -> Vec<P> {
        (0..n)
            .map(|_| {
                [
                    self.range(-half, half),
                    self.range(-half, half),
                    self.range(-half, half),
                ]
            })
            .collect()
    }
}

fn dist(a: P, b: P) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

fn norm(a: P) -> f64 {
    dist(a, [0.0; 3])
}

fn coords(graph: &TheoryGraph, layout: &Layout) -> HashMap<String, P> {
    graph
        .nodes()
        .iter()
        .map(|n| {
            (
                n.id.clone(),
                layout.get(&n.id).expect("node placed").to_array(),
            )
        })
        .collect()
}

fn oracle_mean_edge_length(graph: &TheoryGraph, pos: &HashMap<String, P>) -> f64 {
    let total: f64 = graph
        .edges()
        .iter()
        .map(|e| dist(pos[&e.source], pos[&e.target]))
        .sum();
    total / graph.edge_count() as f64
}

fn oracle_upward_fraction(graph: &TheoryGraph, pos: &HashMap<String, P>) -> f64 {
    let hierarchical: Vec<_> = graph
        .edges()
        .iter()
        .filter(|e| graph.kind(&e.kind).unwrap().hierarchy_weight > 0.0)
        .collect();
    let up = hierarchical
        .iter()
        .filter(|e| pos[&e.target][1] > pos[&e.source][1])
        .count();
    up as f64 / hierarchical.len() as f64
}

/// Seeded placement regenerated from its definition: uniform in the ball of
/// radius `L * cbrt(n)` by rejection from the cube, x/y/z draw order.
fn oracle_placement(n: usize, params: &LayoutParams) -> Vec<P> {
    let radius = params.ideal_edge_length * (n as f64).cbrt();
    let mut rng = Mix(params.seed);
    (0..n)
        .map(|_| loop {
            let c = [
                rng.range(-1.0, 1.0),
                rng.range(-1.0, 1.0),
                rng.range(-1.0, 1.0),
            ];
            if c[0] * c[0] + c[1] * c[1] + c[2] * c[2] <= 1.0 {
                break [c[0] * radius, c[1] * radius, c[2] * radius];
            }
        })
        .collect()
}

fn hierarchy_and_edge_length() -> (Verdict, Verdict) {
    let mut upward = Vec::new();
    let mut flat = Vec::new();
    let mut ratios = Vec::new();
    let mut placement_ok = true;
    for seed in 1..=20u64 {
        let g = random_dag(100, 300, seed);
        for (k_h, sink) in [(None, &mut upward), (Some(0.0), &mut flat)] {
            let mut params = LayoutParams {
                seed,
                ..Default::default()
            };
            if let Some(k) = k_h {
                params.k_hierarchy = k;
            }
            let start = oracle_placement(g.node_count(), &params);
            let lib_start = initial_placement(&g, &params);
            placement_ok &= g
                .nodes()
                .iter()
                .zip(&start)
                .all(|(n, p)| lib_start.get(&n.id).unwrap().to_array() == *p);
            let start_pos: HashMap<String, P> =
                g.nodes().iter().map(|n| n.id.clone()).zip(start).collect();

            let layout = run_layout(&g, &params, EngineOptions::default(), None).unwrap();
            let pos = coords(&g, &layout);
            sink.push(oracle_upward_fraction(&g, &pos));
            ratios
                .push(oracle_mean_edge_length(&g, &pos) / oracle_mean_edge_length(&g, &start_pos));
        }
    }
    let passing = upward.iter().filter(|&&u| u >= 0.9).count();
    let min_up = upward.iter().cloned().fold(f64::INFINITY, f64::min);
    let mean_flat = flat.iter().sum::<f64>() / flat.len() as f64;
    let hierarchy = verdict(
        passing >= 18 && (0.4..=0.6).contains(&mean_flat),
        format!(
            "{passing}/20 graphs with upward_fraction >= 0.90 (min {min_up:.3}); \
             k_hierarchy=0 mean {mean_flat:.3} (want [0.4, 0.6])"
        ),
    );
    let worst = ratios.iter().cloned().fold(0.0, f64::max);
    let edge = verdict(
        placement_ok && worst < 0.7,
        format!(
            "worst final/initial mean edge length {worst:.3} over {} runs (want < 0.7); \
             placement oracle {}",
            ratios.len(),
            if placement_ok { "matches" } else { "MISMATCH" }
        ),
    );
    (hierarchy, edge)
}

/// Net force on every node straight from the force definitions, exact repulsion.
fn oracle_net_forces(g: &TheoryGraph, pts: &[P], p: &LayoutParams) -> Vec<P> {
    let ix: HashMap<&str, usize> = g
        .nodes()
        .iter()
        .enumerate()
        .map(|(i, n)| (n.id.as_str(), i))
        .collect();
    let mut out = vec![[0.0; 3]; pts.len()];
    for i in 0..pts.len() {
        for j in 0..pts.len() {
            let d = dist(pts[i], pts[j]);
            if i == j || d == 0.0 {
                continue;
            }
            let mag = p.k_repel * p.ideal_edge_length.powi(2) / d.max(p.min_distance);
            for c in 0..3 {
                out[i][c] += mag * (pts[i][c] - pts[j][c]) / d;
            }
        }
    }
    for e in g.edges() {
        let (s, t) = (ix[e.source.as_str()], ix[e.target.as_str()]);
        let kind = g.kind(&e.kind).unwrap();
        let d = dist(pts[s], pts[t]);
        if d > 0.0 {
            let dc = d.max(p.min_distance);
            let mag = kind.attraction_weight * p.k_attract * dc * dc / p.ideal_edge_length;
            for c in 0..3 {
                let u = (pts[t][c] - pts[s][c]) / d;
                out[s][c] += mag * u;
                out[t][c] -= mag * u;
            }
        }
        let push = p.k_hierarchy * kind.hierarchy_weight;
        out[t][1] += push;
        out[s][1] -= push;
    }
    out
}

fn barnes_hut() -> Verdict {
    // Exact step: theta = 0 against the brute-force step.
    let params = LayoutParams {
        theta: 0.0,
        ..Default::default()
    };
    let temperature = 0.4;
    let mut worst_step: f64 = 0.0;
    for seed in 1..=5u64 {
        let g = random_digraph(200, 600, &["import", "view"], seed);
        let pts = Mix(1000 + seed).cloud(200, 4.0);
        let vecs: Vec<Vec3> = pts.iter().map(|&p| Vec3::from(p)).collect();
        let layout = Layout::from_points(&g, &vecs);
        let forces = oracle_net_forces(&g, &pts, &params);
        let (next, _) = step(&g, &layout, &params, temperature, EngineOptions::default()).unwrap();
        let cap = temperature * params.ideal_edge_length;
        for (i, node) in g.nodes().iter().enumerate() {
            let f = forces[i];
            let m = norm(f);
            let s = if m > 0.0 { m.min(cap) / m } else { 0.0 };
            let got = next.get(&node.id).unwrap().to_array();
            for c in 0..3 {
                let want = pts[i][c] + f[c] * s;
                let scale = want.abs().max(params.ideal_edge_length);
                worst_step = worst_step.max((got[c] - want).abs() / scale);
            }
        }
    }

    // Approximate forces at theta = 0.75 on edge-free clouds: net force is repulsion.
    let params = LayoutParams::default();
    let mut medians = Vec::new();
    for seed in 1..=10u64 {
        let g = random_digraph(1000, 0, &["import"], seed);
        let pts = Mix(seed).cloud(1000, 10.0);
        let vecs: Vec<Vec3> = pts.iter().map(|&p| Vec3::from(p)).collect();
        let layout = Layout::from_points(&g, &vecs);
        let exact = oracle_net_forces(&g, &pts, &params);
        let approx = node_forces(&g, &layout, &params, EngineOptions::default()).unwrap();
        let mut errors: Vec<f64> = approx
            .iter()
            .zip(&exact)
            .map(|(a, e)| {
                let a = a.net().to_array();
                norm([a[0] - e[0], a[1] - e[1], a[2] - e[2]]) / norm(*e)
            })
            .collect();
        errors.sort_by(|a, b| a.partial_cmp(b).unwrap());
        medians.push(0.5 * (errors[499] + errors[500]));
    }
    let worst_median = medians.iter().cloned().fold(0.0, f64::max);
    verdict(
        worst_step <= 1e-9 && worst_median <= 0.05,
        format!(
            "theta=0 step max relative deviation {worst_step:.2e} (want <= 1e-9); \
             theta=0.75 worst median force error {:.3}% over 10 seeds (want <= 5%)",
            worst_median * 100.0
        ),
    )
}

type Sub = (Vec<String>, Vec<String>);

/// Node and edge ids visible when `seen` holds the kept nodes, in graph order.
fn induced(g: &TheoryGraph, seen: &HashSet<String>, kinds: &[&str]) -> Sub {
    let nodes = g
        .nodes()
        .iter()
        .filter(|n| seen.contains(&n.id))
        .map(|n| n.id.clone())
        .collect();
    let edges = g
        .edges()
        .iter()
        .filter(|e| {
            kinds.contains(&e.kind.as_str()) && seen.contains(&e.source) && seen.contains(&e.target)
        })
        .map(|e| e.id.clone())
        .collect();
    (nodes, edges)
}

fn bfs_reach(g: &TheoryGraph, start: &str, reversed: bool, kinds: &[&str]) -> Sub {
    let mut seen = HashSet::from([start.to_owned()]);
    let mut queue = VecDeque::from([start.to_owned()]);
    while let Some(v) = queue.pop_front() {
        for e in g
            .edges()
            .iter()
            .filter(|e| kinds.contains(&e.kind.as_str()))
        {
            let (from, to) = if reversed {
                (&e.target, &e.source)
            } else {
                (&e.source, &e.target)
            };
            if *from == v && seen.insert(to.clone()) {
                queue.push_back(to.clone());
            }
        }
    }
    induced(g, &seen, kinds)
}

fn bfs_hops(g: &TheoryGraph, center: &str, k: usize, kinds: &[&str]) -> Sub {
    let mut hops = HashMap::from([(center.to_owned(), 0usize)]);
    let mut queue = VecDeque::from([center.to_owned()]);
    while let Some(v) = queue.pop_front() {
        let h = hops[&v];
        if h == k {
            continue;
        }
        for e in g
            .edges()
            .iter()
            .filter(|e| kinds.contains(&e.kind.as_str()))
        {
            for (a, b) in [(&e.source, &e.target), (&e.target, &e.source)] {
                if *a == v && !hops.contains_key(b) {
                    hops.insert(b.clone(), h + 1);
                    queue.push_back(b.clone());
                }
            }
        }
    }
    induced(g, &hops.keys().cloned().collect(), kinds)
}

fn filters() -> Verdict {
    const KINDS: [&str; 3] = ["import", "view", "meta"];
    let subsets: [&[&str]; 4] = [&KINDS, &KINDS[..1], &KINDS[1..], &KINDS[..2]];
    let mut checks = 0;
    let mut mismatches = 0;
    for case in 0..100u64 {
        let mut rng = Mix(case);
        let n = 2 + (rng.next() % 199) as usize;
        let m = (rng.next() % (3 * n as u64 + 1)) as usize;
        let g = random_digraph(n, m, &KINDS, case);
        for _ in 0..3 {
            let start = g.nodes()[(rng.next() % n as u64) as usize].id.clone();
            let kinds = subsets[(rng.next() % 4) as usize];
            for reversed in [false, true] {
                let got = reachable_subgraph(&g, &start, reversed, kinds).unwrap();
                checks += 1;
                mismatches += usize::from(
                    (got.visible_nodes, got.visible_edges)
                        != bfs_reach(&g, &start, reversed, kinds),
                );
            }
            let k = (rng.next() % 4) as usize;
            let got = neighborhood_subgraph(&g, &[&start], k, kinds).unwrap();
            checks += 1;
            mismatches += usize::from(
                (got.visible_nodes, got.visible_edges) != bfs_hops(&g, &start, k, kinds),
            );
        }
    }
    verdict(
        mismatches == 0,
        format!("{mismatches} mismatches in {checks} reachable/coreachable/neighborhood checks on 100 digraphs"),
    )
}

fn transforms() -> Verdict {
    let mut y_exact = true;
    let mut worst_rot: f64 = 0.0;
    let mut worst_scale: f64 = 0.0;
    let mut worst_inverse: f64 = 0.0;
    for seed in 0..20u64 {
        let g = random_digraph(60, 0, &["import"], seed);
        let mut rng = Mix(500 + seed);
        let pts = rng.cloud(60, 50.0);
        let vecs: Vec<Vec3> = pts.iter().map(|&p| Vec3::from(p)).collect();
        let layout = Layout::from_points(&g, &vecs);
        let angle = rng.range(-10.0, 10.0);
        let factor = rng.range(0.05, 20.0);
        let pivot = Vec3::from([
            rng.range(-5.0, 5.0),
            rng.range(-5.0, 5.0),
            rng.range(-5.0, 5.0),
        ]);

        let rot = rotate_about_vertical(&layout, angle).unwrap();
        let scaled = scale_positions(&layout, factor, pivot).unwrap();
        let ids: Vec<&String> = layout.positions.keys().collect();
        for a in &ids {
            y_exact &= rot.get(a).unwrap().y.to_bits() == layout.get(a).unwrap().y.to_bits();
        }
        for (i, a) in ids.iter().enumerate() {
            for b in &ids[i + 1..] {
                let d0 = dist(
                    layout.get(a).unwrap().to_array(),
                    layout.get(b).unwrap().to_array(),
                );
                let dr = dist(
                    rot.get(a).unwrap().to_array(),
                    rot.get(b).unwrap().to_array(),
                );
                let ds = dist(
                    scaled.get(a).unwrap().to_array(),
                    scaled.get(b).unwrap().to_array(),
                );
                worst_rot = worst_rot.max((dr - d0).abs() / d0);
                worst_scale = worst_scale.max((ds - factor * d0).abs() / (factor * d0));
            }
        }
        let back_rot = rotate_about_vertical(&rot, -angle).unwrap();
        let back_scale = scale_positions(&scaled, 1.0 / factor, pivot).unwrap();
        let extent = pts.iter().map(|p| norm(*p)).fold(0.0, f64::max) + norm(pivot.to_array());
        for a in &ids {
            let p = layout.get(a).unwrap().to_array();
            for back in [&back_rot, &back_scale] {
                let q = back.get(a).unwrap().to_array();
                worst_inverse = worst_inverse.max(dist(p, q) / extent);
            }
        }
    }
    verdict(
        y_exact && worst_rot <= 1e-12 && worst_scale <= 1e-12 && worst_inverse <= 1e-12,
        format!(
            "rotation keeps y bitwise: {y_exact}; distance error rotate {worst_rot:.1e}, \
             scale {worst_scale:.1e}, inverse pairs {worst_inverse:.1e} (want <= 1e-12)"
        ),
    )
}

fn determinism() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let graph = dir.path().join("graph.json");
    std::fs::write(&graph, serialize_graph(&random_dag(150, 400, 77))).unwrap();
    let mut outputs = Vec::new();
    for run in 0..2 {
        let out = dir.path().join(format!("run{run}.json"));
        let status = Command::new(env!("CARGO_BIN_EXE_tgforge"))
            .args([
                "layout",
                graph.to_str().unwrap(),
                "-o",
                out.to_str().unwrap(),
                "--seed",
                "5",
            ])
            .output()
            .unwrap()
            .status;
        if !status.success() {
            return verdict(false, format!("layout run {run} exited with {status}"));
        }
        outputs.push(std::fs::read(out).unwrap());
    }
    verdict(
        outputs[0] == outputs[1],
        format!(
            "two CLI runs wrote {} and {} bytes, identical: {}",
            outputs[0].len(),
            outputs[1].len(),
            outputs[0] == outputs[1]
        ),
    )
}

fn scale_target() -> Verdict {
    let g = synthetic_library(739, 2851, 0.2, 2017);
    let params = LayoutParams {
        theta: 0.75,
        max_iterations: 500,
        // Never stop early: all 500 iterations run.
        convergence_eps: f64::MIN_POSITIVE,
        seed: 3,
        ..Default::default()
    };
    let mut results = Vec::new();
    let mut slowest = Duration::ZERO;
    for threads in [1, 2, 4] {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        let started = Instant::now();
        let layout = pool
            .install(|| run_layout(&g, &params, EngineOptions::default(), None))
            .unwrap();
        slowest = slowest.max(started.elapsed());
        results.push(layout);
    }
    let started = Instant::now();
    results.push(run_layout(&g, &params, EngineOptions::sequential(), None).unwrap());
    slowest = slowest.max(started.elapsed());

    let iterations = results[0].iterations_run;
    let identical = results.iter().all(|l| {
        l.positions
            .iter()
            .zip(&results[0].positions)
            .all(|((a, p), (b, q))| {
                a == b && p.to_array().map(f64::to_bits) == q.to_array().map(f64::to_bits)
            })
    });
    verdict(
        iterations == 500 && slowest < Duration::from_secs(10) && identical,
        format!(
            "739 nodes / 2851 edges, {iterations} iterations: slowest run {:.2}s (want < 10s); \
             bitwise identical across 1/2/4 threads and sequential: {identical}",
            slowest.as_secs_f64()
        ),
    )
}

fn cycle_validation() -> Verdict {
    let g = parse_graph(
        &std::fs::read(fixture("import_cycle.json")).unwrap(),
        &LoadOptions::default(),
    )
    .unwrap();
    let report = validate(&g);
    let witness = report.cycle_witness.clone().unwrap_or_default();
    let closed = witness.len() >= 3 && witness.first() == witness.last();
    let walk_ok = witness.windows(2).all(|w| {
        g.edges()
            .iter()
            .any(|e| e.kind == "import" && e.source == w[0] && e.target == w[1])
    });
    let layout = run_layout(&g, &LayoutParams::default(), EngineOptions::default(), None);
    let laid_out = layout
        .as_ref()
        .map(|l| l.len() == g.node_count() && l.positions.values().all(|p| p.is_finite()))
        .unwrap_or(false);
    verdict(
        !report.import_dag_ok && closed && walk_ok && laid_out,
        format!(
            "import_dag_ok={}, witness {:?} is a closed import walk: {}, layout completed: {laid_out}",
            report.import_dag_ok,
            witness,
            closed && walk_ok
        ),
    )
}

#[test]
fn acceptance() {
    let (hierarchy, edges) = hierarchy_and_edge_length();
    let results = [
        ("hierarchy direction", hierarchy),
        ("edge-length reduction", edges),
        ("barnes-hut correctness", barnes_hut()),
        ("filter oracle equivalence", filters()),
        ("transform invariants", transforms()),
        ("cli determinism", determinism()),
        ("scale target", scale_target()),
        ("import cycle validation", cycle_validation()),
    ];
    for (name, v) in &results {
        println!(
            "{} {name}: {}",
            if v.pass { "PASS" } else { "FAIL" },
            v.detail
        );
    }
    let failed: Vec<&str> = results
        .iter()
        .filter(|(_, v)| !v.pass)
        .map(|(n, _)| *n)
        .collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
