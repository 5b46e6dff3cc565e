use std::path::PathBuf;

use proptest::prelude::*;
use tgforge_core::generate::random_digraph;
use tgforge_core::graph::{
    graph_to_json, parse_graph, serialize_graph, validate, EdgeKind, GraphEdge, GraphNode,
    LoadOptions, TheoryGraph,
};
use tgforge_core::GraphError;

fn fixture(name: &str) -> Vec<u8> {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name);
    std::fs::read(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

#[test]
fn nasa_scale_fixture() {
    let g = parse_graph(&fixture("nasa739.json"), &LoadOptions::default()).unwrap();
    assert_eq!(g.node_count(), 739);
    assert_eq!(g.edge_count(), 2851);
    assert!(validate(&g).import_dag_ok);
}

#[test]
fn bundled_fixtures() {
    let opts = LoadOptions::default();
    let chain = parse_graph(&fixture("chain.json"), &opts).unwrap();
    assert_eq!((chain.node_count(), chain.edge_count()), (3, 2));

    let cycle = parse_graph(&fixture("import_cycle.json"), &opts).unwrap();
    let report = validate(&cycle);
    assert!(!report.import_dag_ok);
    let witness = report.cycle_witness.unwrap();
    assert_eq!(witness.first(), witness.last());
    for pair in witness.windows(2) {
        assert!(cycle
            .edges()
            .iter()
            .any(|e| e.kind == "import" && e.source == pair[0] && e.target == pair[1]));
    }

    match parse_graph(&fixture("broken.json"), &opts) {
        Err(GraphError::DanglingEndpoint { edge, .. }) => assert_eq!(edge, "dangling-edge"),
        other => panic!("expected dangling endpoint, got {other:?}"),
    }
    assert!(matches!(
        parse_graph(&fixture("duplicate.json"), &opts),
        Err(GraphError::DuplicateNode(_))
    ));
}

#[test]
fn hundred_node_round_trip() {
    let g = random_digraph(100, 250, &["import", "view", "structure"], 100);
    let back = parse_graph(&serialize_graph(&g), &LoadOptions::default()).unwrap();
    assert!(back.structurally_eq(&g));
    assert_eq!(serialize_graph(&back), serialize_graph(&g));
}

#[test]
fn json_value_uses_wire_names() {
    let g = random_digraph(3, 2, &["import"], 1);
    let v = graph_to_json(&g);
    assert!(v["nodes"][0]["uri"].is_string());
    assert!(v["edges"][0]["from"].is_string());
    assert!(v["kinds"][0]["hierarchyWeight"].is_number());
}

fn arb_graph() -> impl Strategy<Value = TheoryGraph> {
    let kinds = prop::collection::vec(
        (
            "[a-z]{1,6}",
            any::<[u8; 3]>(),
            0.0f64..5.0,
            0.0f64..5.0,
            any::<bool>(),
        ),
        0..4,
    );
    (1usize..40, kinds)
        .prop_flat_map(|(n, kinds)| {
            let mut names: Vec<String> = kinds.iter().map(|k| k.0.clone()).collect();
            names.sort();
            names.dedup();
            let mut pool = names.clone();
            pool.extend(["import".to_string(), "view".to_string()]);
            let edges = prop::collection::vec(
                (0..n, 0..n, prop::sample::select(pool), "[ -~]{0,12}"),
                0..80,
            );
            let labels =
                prop::collection::vec(("\\PC{0,10}", prop::option::of("[a-z:/.]{1,20}")), n);
            (Just(n), Just(kinds), edges, labels)
        })
        .prop_map(|(n, kinds, edges, labels)| {
            let mut declared: Vec<EdgeKind> = Vec::new();
            for (name, color, h, a, acyclic) in kinds {
                if declared.iter().all(|k| k.name != name) {
                    declared.push(EdgeKind {
                        name,
                        color,
                        hierarchy_weight: h,
                        attraction_weight: a,
                        validate_acyclic: acyclic,
                    });
                }
            }
            let nodes = (0..n)
                .zip(labels)
                .map(|(i, (label, details))| GraphNode {
                    id: format!("n{i}"),
                    label,
                    uri: format!("urn:test:{i}"),
                    details_url: details,
                })
                .collect();
            let edges = edges
                .into_iter()
                .filter(|(s, t, _, _)| s != t)
                .enumerate()
                .map(|(i, (s, t, kind, suffix))| GraphEdge {
                    id: format!("e{i}"),
                    source: format!("n{s}"),
                    target: format!("n{t}"),
                    kind,
                    uri: format!("urn:edge:{i}{suffix}"),
                })
                .collect();
            TheoryGraph::new(nodes, edges, declared, LoadOptions::default()).unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn round_trip(g in arb_graph()) {
        let bytes = serialize_graph(&g);
        let back = parse_graph(&bytes, &LoadOptions::default()).unwrap();
        prop_assert!(back.structurally_eq(&g));
    }

    #[test]
    fn validate_is_deterministic_and_witness_is_a_cycle(g in arb_graph()) {
        let r = validate(&g);
        prop_assert_eq!(&r, &validate(&g));
        prop_assert_eq!(r.import_dag_ok, r.cycle_witness.is_none());
        if let Some(w) = &r.cycle_witness {
            prop_assert!(w.len() >= 3);
            prop_assert_eq!(w.first(), w.last());
            for pair in w.windows(2) {
                let found = g.edges().iter().any(|e| {
                    g.kind(&e.kind).unwrap().validate_acyclic
                        && e.source == pair[0]
                        && e.target == pair[1]
                });
                prop_assert!(found, "no hierarchy edge {} -> {}", pair[0], pair[1]);
            }
        }
    }

    #[test]
    fn dangling_edges_rejected(g in arb_graph(), which in any::<prop::sample::Index>(), to_source in any::<bool>()) {
        prop_assume!(g.edge_count() > 0);
        let mut v: serde_json::Value = serde_json::from_slice(&serialize_graph(&g)).unwrap();
        let i = which.index(g.edge_count());
        let key = if to_source { "from" } else { "to" };
        v["edges"][i][key] = serde_json::Value::String("no-such-node".into());
        let err = parse_graph(&serde_json::to_vec(&v).unwrap(), &LoadOptions::default()).unwrap_err();
        let expected = g.edges()[i].id.clone();
        let matches = matches!(&err, GraphError::DanglingEndpoint { edge, node } if *edge == expected && node == "no-such-node");
        prop_assert!(matches, "got {:?}", err);
    }
}
