use std::time::Duration;

use datagraph::config::{BackendConfig, ExperimentConfig, TaskConfig, WorldSource};
use datagraph::mock::{fixtures, MockReply, MockServer};
use datagraph::{CachedBackend, Harness, RemoteBackend, RemoteEndpointConfig};
use datagraph_core::graph::{GraphBuilder, Node, NodeId, Pose, SceneObject, Snapshot};
use datagraph_core::query::{Backend, Predicate, Query};
use datagraph_core::traversal::{proximity_search_first, TraversalOptions};
use datagraph_core::worldgen::{TaskKind, WorldSpec};
use datagraph_core::{BackendError, TraversalError};

fn node(id: u32) -> Node {
    Node {
        id: NodeId(id),
        pose: Pose::at(0.0, 0.0, 0.0),
        snapshot: Snapshot {
            objects: vec![SceneObject::new("keyfob", [1.0, 2.0, 0.0], 9).with_attribute("number", "42")],
            payload_ref: Some("s3://bucket/scan-7.ply".into()),
        },
    }
}

fn query() -> Query {
    Query::find("Where is keyfob 42?", Predicate::label("keyfob").and_attribute("number", "42"))
}

fn remote(server: &MockServer) -> RemoteEndpointConfig {
    RemoteEndpointConfig {
        timeout_ms: 5_000,
        ..RemoteEndpointConfig::new(server.base_url())
    }
}

#[test]
fn request_shape_and_bearer_token() {
    let server = MockServer::always(None, fixtures::success()).unwrap();
    let backend = RemoteBackend::new(RemoteEndpointConfig {
        auth_token: Some("s3cret".into()),
        ..remote(&server)
    })
    .unwrap();
    backend.answer(&node(7), &query()).unwrap();

    let reqs = server.requests();
    assert_eq!(reqs.len(), 1);
    assert_eq!(reqs[0].method, "POST");
    assert_eq!(reqs[0].path, "/query");
    assert_eq!(reqs[0].authorization.as_deref(), Some("Bearer s3cret"));
    let body = reqs[0].json().unwrap();
    assert_eq!(body["query_text"], "Where is keyfob 42?");
    assert_eq!(body["mode"], "find");
    assert_eq!(body["node_id"], 7);
    assert_eq!(body["payload_ref"], "s3://bucket/scan-7.ply");
    assert!(body["objects_hint"].is_null());
}

#[test]
fn annotations_are_forwarded_only_when_enabled() {
    let server = MockServer::always(None, fixtures::success()).unwrap();
    let backend = RemoteBackend::new(RemoteEndpointConfig {
        forward_annotations: true,
        ..remote(&server)
    })
    .unwrap();
    backend.answer(&node(1), &query()).unwrap();
    let body = server.requests()[0].json().unwrap();
    assert_eq!(body["objects_hint"][0]["label"], "keyfob");
    assert_eq!(body["objects_hint"][0]["attributes"]["number"], "42");
    assert!(server.requests()[0].authorization.is_none());
}

#[test]
fn verdict_comes_from_the_response_not_the_annotations() {
    // The snapshot holds a matching keyfob, but the model says no.
    let server = MockServer::always(None, MockReply::json(r#"{"satisfied":false,"text":"nothing here"}"#)).unwrap();
    let r = RemoteBackend::new(remote(&server)).unwrap().answer(&node(1), &query()).unwrap();
    assert!(!r.satisfied);
    assert!(r.matches.is_empty());
    assert_eq!(r.text, "nothing here");
}

#[test]
fn error_fixtures() {
    type Expect = fn(&BackendError) -> bool;
    let cases: [(MockReply, u64, Expect); 4] = [
        (fixtures::slow(Duration::from_millis(500)), 80, |e| matches!(e, BackendError::Timeout { timeout_ms: 80 })),
        (fixtures::server_error(), 5_000, |e| matches!(e, BackendError::Protocol { status: 500, body } if body.contains("internal"))),
        (MockReply::status(401, "denied"), 5_000, |e| matches!(e, BackendError::Protocol { status: 401, .. })),
        (fixtures::malformed(), 5_000, |e| matches!(e, BackendError::MalformedResponse(_))),
    ];
    for (reply, timeout_ms, expected) in cases {
        let server = MockServer::always(None, reply).unwrap();
        let backend = RemoteBackend::new(RemoteEndpointConfig { timeout_ms, ..remote(&server) }).unwrap();
        let err = backend.answer(&node(1), &query()).unwrap_err();
        assert!(expected(&err), "{err:?}");
    }
}

#[test]
fn unreachable_endpoint_is_a_transport_error() {
    let addr = {
        let server = MockServer::always(None, fixtures::success()).unwrap();
        server.base_url()
    };
    let backend = RemoteBackend::new(RemoteEndpointConfig {
        timeout_ms: 2_000,
        ..RemoteEndpointConfig::new(addr)
    })
    .unwrap();
    assert!(matches!(
        backend.answer(&node(1), &query()),
        Err(BackendError::Transport(_) | BackendError::Timeout { .. })
    ));
}

#[test]
fn long_error_bodies_are_truncated() {
    let server = MockServer::always(None, MockReply::status(503, "x".repeat(5_000))).unwrap();
    match RemoteBackend::new(remote(&server)).unwrap().answer(&node(1), &query()) {
        Err(BackendError::Protocol { status: 503, body }) => assert_eq!(body.len(), 512),
        other => panic!("{other:?}"),
    }
}

#[test]
fn failure_mid_traversal_keeps_the_partial_result() {
    // Line graph 0-1-2-3; the service fails on node 2.
    let mut b = GraphBuilder::new();
    for i in 0..4 {
        b.add_node(Pose::at(f64::from(i), 0.0, 0.0), Snapshot::empty()).unwrap();
    }
    for i in 0..3 {
        b.add_edge(NodeId(i), NodeId(i + 1), true, None).unwrap();
    }
    let g = b.seal();
    let server = MockServer::start(None, |req| {
        if req.json().is_some_and(|v| v["node_id"] == 2) {
            fixtures::server_error()
        } else {
            MockReply::json(r#"{"satisfied":false,"text":"no"}"#)
        }
    })
    .unwrap();
    let backend = RemoteBackend::new(remote(&server)).unwrap();
    match proximity_search_first(&g, &backend, &query(), NodeId(0), TraversalOptions::hops()) {
        Err(TraversalError::Backend { node, source, partial }) => {
            assert_eq!(node, NodeId(2));
            assert!(matches!(source, BackendError::Protocol { status: 500, .. }));
            assert_eq!(partial.visit_order, vec![NodeId(0), NodeId(1)]);
            assert_eq!(partial.total_backend_calls, 2);
            assert!(partial.first_satisfied.is_none());
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn cache_in_front_of_remote_saves_requests() {
    let server = MockServer::always(None, fixtures::success()).unwrap();
    let cached = CachedBackend::new(RemoteBackend::new(remote(&server)).unwrap());
    for _ in 0..5 {
        cached.answer(&node(4), &query()).unwrap();
    }
    assert_eq!(server.requests().len(), 1);
    assert_eq!(cached.hits(), 4);
}

#[test]
fn parallel_harness_respects_in_flight_limit() {
    let limit = 2;
    let server = MockServer::always(
        Some(limit),
        MockReply::json(r#"{"satisfied":false,"text":"no"}"#).delayed(Duration::from_millis(5)),
    )
    .unwrap();
    let mut c = ExperimentConfig::new(
        WorldSource::Spec(WorldSpec::new(3, 3, 1)),
        TaskConfig { kind: TaskKind::NearestSearch, count: 6, seed: 2 },
    );
    c.backend = BackendConfig::Remote(RemoteEndpointConfig {
        max_in_flight: limit,
        ..remote(&server)
    });
    c.workers = 6;
    let report = Harness::from_config(c).unwrap().compare().unwrap();
    server.assert_within_limit();
    assert!(server.peak_in_flight() <= limit);
    // Every node answers "no", so each trial scans the whole 3x3 world.
    assert!(report.per_trial.iter().all(|t| t.backend_calls == 9 && t.found_node.is_none()));
}

#[test]
fn harness_marks_remote_failures_per_trial() {
    let server = MockServer::always(None, fixtures::server_error()).unwrap();
    let mut c = ExperimentConfig::new(
        WorldSource::Spec(WorldSpec::new(3, 3, 1)),
        TaskConfig { kind: TaskKind::NearestSearch, count: 3, seed: 2 },
    );
    c.backend = BackendConfig::Remote(remote(&server));
    let report = Harness::from_config(c).unwrap().compare().unwrap();
    assert_eq!(report.per_trial.len(), 6);
    assert!(report.per_trial.iter().all(|t| t.error.as_deref().is_some_and(|e| e.contains("500"))));
    assert!(report.per_trial.iter().all(|t| !t.found_is_closest));
}
