use datagraph::formats::{
    graph_from_str, graph_to_string, load_graph, load_ground_truth_file, load_replay_store_file, save_graph,
    save_ground_truth_file, save_replay_store_file,
};
use datagraph::Error;
use datagraph_core::graph::{Datagraph, GraphBuilder, NodeId, Pose, SceneObject, Snapshot};
use datagraph_core::query::{OracleBackend, Predicate, Query, ReplayStore};
use datagraph_core::traversal::{proximity_query_all, TraversalOptions};
use datagraph_core::worldgen::{generate_world, WorldSpec};
use proptest::prelude::*;

fn coord() -> impl Strategy<Value = f64> {
    prop_oneof![
        -1e6..1e6f64,
        Just(0.0),
        Just(-0.0),
        Just(1.0 / 3.0),
        Just(f64::MIN_POSITIVE),
        Just(1e-300),
        Just(123_456_789.123_456_78),
    ]
}

fn object() -> impl Strategy<Value = SceneObject> {
    (
        "[a-z_]{1,8}",
        proptest::collection::btree_map("[a-z]{1,4}", "[ -~]{0,6}", 0..3),
        [coord(), coord(), coord()],
        any::<i64>(),
    )
        .prop_map(|(label, attributes, world_position, instance_id)| SceneObject {
            label,
            attributes,
            world_position,
            instance_id,
        })
}

prop_compose! {
    fn graph()(
        nodes in proptest::collection::vec(
            ([coord(), coord(), coord()], any::<bool>(), proptest::collection::vec(object(), 0..3),
             proptest::option::of("[ -~]{0,12}")),
            0..12),
        raw_edges in proptest::collection::vec((any::<u32>(), any::<u32>(), any::<bool>(), 1e-9..1e4f64), 0..20),
    ) -> Datagraph {
        let mut b = GraphBuilder::new();
        for (p, oriented, objects, payload_ref) in nodes {
            let mut pose = Pose::at(p[0], p[1], p[2]);
            if oriented {
                let h = std::f64::consts::FRAC_1_SQRT_2;
                pose = pose.with_orientation([h, 0.0, 0.0, h]);
            }
            b.add_node(pose, Snapshot { objects, payload_ref }).unwrap();
        }
        let n = b.node_count() as u32;
        if n > 1 {
            for (a, c, t, len) in raw_edges {
                let (a, c) = (NodeId(a % n), NodeId(c % n));
                // Self loops and repeats are rejected by the builder; skip them.
                let _ = b.add_edge(a, c, t, Some(len));
            }
        }
        b.seal()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn text_round_trip_is_identity(g in graph()) {
        let back = graph_from_str(&graph_to_string(&g), "mem").unwrap();
        prop_assert_eq!(&back, &g);
        for (a, b) in back.edges().iter().zip(g.edges()) {
            prop_assert_eq!(a.length_m.to_bits(), b.length_m.to_bits());
        }
    }

    #[test]
    fn stream_round_trip_is_identity(g in graph()) {
        let mut buf = Vec::new();
        save_graph(&g, &mut buf).unwrap();
        prop_assert_eq!(load_graph(buf.as_slice(), "buf").unwrap(), g);
    }

    #[test]
    fn serialization_is_stable(g in graph()) {
        let once = graph_to_string(&g);
        let twice = graph_to_string(&graph_from_str(&once, "mem").unwrap());
        prop_assert_eq!(once, twice);
    }

    #[test]
    fn truncation_never_yields_a_graph(g in graph(), frac in 0.0..1.0f64) {
        let text = graph_to_string(&g);
        let mut cut = (text.len() as f64 * frac) as usize;
        while !text.is_char_boundary(cut) {
            cut -= 1;
        }
        prop_assert!(graph_from_str(&text[..cut], "cut").is_err());
    }
}

#[test]
fn world_and_truth_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let spec = WorldSpec {
        boundary_duplicate_prob: 0.3,
        ..WorldSpec::new(5, 4, 77)
    };
    let (g, t) = generate_world(&spec).unwrap();
    let (gp, tp) = datagraph::harness::write_world(&spec, dir.path()).unwrap();
    assert_eq!(datagraph::formats::load_graph_file(&gp).unwrap(), g);
    assert_eq!(load_ground_truth_file(&tp).unwrap(), t);

    let path = dir.path().join("truth2.json");
    save_ground_truth_file(&t, &path).unwrap();
    assert_eq!(load_ground_truth_file(&path).unwrap(), t);

    let spec_path = dir.path().join("spec.json");
    datagraph::formats::save_world_spec_file(&spec, &spec_path).unwrap();
    assert_eq!(datagraph::formats::load_world_spec_file(&spec_path).unwrap(), spec);
}

#[test]
fn replay_store_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let (g, _) = generate_world(&WorldSpec::new(3, 3, 1)).unwrap();
    let q = Query::find("chair?", Predicate::label("chair"));
    let r = proximity_query_all(&g, &OracleBackend, &q, NodeId(4), TraversalOptions::hops()).unwrap();
    let mut store = ReplayStore::new();
    for resp in &r.responses {
        store.record(&q, resp);
    }
    let path = dir.path().join("replay.json");
    save_replay_store_file(&store, &path).unwrap();
    let back = load_replay_store_file(&path).unwrap();
    assert_eq!(back, store);
    assert_eq!(back.len(), 9);

    let text = std::fs::read_to_string(&path).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["format_version"], 1);
    std::fs::write(&path, text.replace("\"format_version\": 1", "\"format_version\": 9")).unwrap();
    assert!(matches!(load_replay_store_file(&path), Err(Error::FormatVersion { found: 9, .. })));
}

#[test]
fn missing_file_is_an_io_error_naming_the_path() {
    let err = datagraph::formats::load_graph_file(std::path::Path::new("/nonexistent/g.json")).unwrap_err();
    assert!(matches!(err, Error::Io { .. }));
    assert!(err.to_string().contains("/nonexistent/g.json"));
}
