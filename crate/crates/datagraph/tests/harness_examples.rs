mod common;

use std::collections::BTreeSet;

use datagraph::config::{BackendConfig, ExperimentConfig, ReportFormat, Strategy, TaskConfig, WorldSource};
use datagraph::harness::{task_seed, Harness, RouteRequest, SharedBackend};
use datagraph::report::CSV_HEADER;
use datagraph::Error;
use datagraph_core::graph::{Datagraph, GraphBuilder, Node, NodeId, Pose, SceneObject, Snapshot};
use datagraph_core::query::{Backend, OracleBackend, Predicate, Query, QueryResponse};
use datagraph_core::worldgen::{generate_world, CatalogEntry, TaskKind, WorldSpec};
use datagraph_core::{BackendError, Metric};

fn config(spec: WorldSpec, kind: TaskKind, count: u32, seed: u64) -> ExperimentConfig {
    ExperimentConfig::new(WorldSource::Spec(spec), TaskConfig { kind, count, seed })
}

fn chairs_only(w: u32, h: u32, seed: u64) -> WorldSpec {
    WorldSpec {
        catalog: vec![CatalogEntry::new("chair", 1.0)],
        objects_per_room_mean: 3.0,
        ..WorldSpec::new(w, h, seed)
    }
}

#[test]
fn single_room_both_strategies_use_one_call() {
    let seed = (0..100)
        .find(|&s| !generate_world(&chairs_only(1, 1, s)).unwrap().1.instances.is_empty())
        .unwrap();
    let report = Harness::from_config(config(chairs_only(1, 1, seed), TaskKind::NearestSearch, 1, 0))
        .unwrap()
        .compare()
        .unwrap();
    assert_eq!(report.per_trial.len(), 2);
    for t in &report.per_trial {
        assert_eq!(t.backend_calls, 1, "{t:?}");
        assert!(t.found_is_closest);
        assert_eq!(t.hops_of_found, Some(0));
    }
}

#[test]
fn keyfob_tasks_on_six_by_six_are_always_closest() {
    let mut c = config(WorldSpec::new(6, 6, 11), TaskKind::KeyfobMatch, 50, 3);
    c.strategies = vec![Strategy::Proximity];
    let report = Harness::from_config(c).unwrap().compare().unwrap();
    assert_eq!(report.per_trial.len(), 50);
    assert_eq!(report.summary[&Strategy::Proximity].closest_rate, 1.0);
    assert!(!report.has_errors());
}

#[test]
fn meters_metric_is_scored_in_meters() {
    let mut c = config(WorldSpec::new(7, 5, 4), TaskKind::NearestSearch, 30, 9);
    c.metric = Metric::Meters;
    let report = Harness::from_config(c).unwrap().compare().unwrap();
    assert_eq!(report.summary[&Strategy::Proximity].closest_rate, 1.0);
    for t in report.per_trial.iter().filter(|t| t.strategy == Strategy::Proximity) {
        assert_eq!(t.meters_of_found, t.optimal_meters);
    }
}

#[test]
fn reports_are_reproducible_and_written_in_both_formats() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, workers: usize| {
        let mut c = config(WorldSpec::new(5, 5, 2), TaskKind::NearestSearch, 25, 1);
        c.output_dir = Some(dir.path().join(name));
        c.report_formats = vec![ReportFormat::Json, ReportFormat::Csv];
        c.workers = workers;
        Harness::from_config(c).unwrap().compare().unwrap()
    };
    let a = run("a", 1);
    let b = run("b", 3);
    assert_eq!(a.without_wall_clock().to_json(), b.without_wall_clock().to_json());

    let csv = std::fs::read_to_string(dir.path().join("a/compare.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), CSV_HEADER.join(","));
    assert_eq!(csv.lines().count(), 1 + 50);
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("a/compare.json")).unwrap()).unwrap();
    assert_eq!(json["per_trial"].as_array().unwrap().len(), 50);
    assert!(json["summary"]["proximity"]["closest_rate"].is_number());
}

#[test]
fn task_seeds_differ_per_index() {
    let seeds: BTreeSet<u64> = (0..1000).map(|i| task_seed(42, i)).collect();
    assert_eq!(seeds.len(), 1000);
    assert_eq!(task_seed(42, 0), 42);
}

/// Fails on one particular node, answers like the oracle elsewhere.
struct FailsAt(NodeId);

impl Backend for FailsAt {
    fn answer(&self, node: &Node, query: &Query) -> Result<QueryResponse, BackendError> {
        if node.id == self.0 {
            return Err(BackendError::Transport("connection reset".into()));
        }
        OracleBackend.answer(node, query)
    }
}

#[test]
fn backend_failure_marks_trial_and_run_continues() {
    let spec = WorldSpec::new(4, 4, 5);
    let (g, t) = generate_world(&spec).unwrap();
    let c = config(spec, TaskKind::NearestSearch, 20, 2);
    let backend: SharedBackend = Box::new(FailsAt(NodeId(0)));
    let report = Harness::from_parts(c, g, Some(t), backend).unwrap().compare().unwrap();
    assert!(report.has_errors());
    assert_eq!(report.per_trial.len(), 40);
    // Brute force always starts at node 0.
    for t in report.per_trial.iter().filter(|t| t.strategy == Strategy::BruteForce) {
        assert!(t.error.as_deref().unwrap().contains("node 0"), "{t:?}");
        assert!(!t.found_is_closest);
    }
    assert!(report
        .per_trial
        .iter()
        .any(|t| t.strategy == Strategy::Proximity && t.error.is_none()));
}

#[test]
fn invalid_config_fails_before_any_trial() {
    let mut c = config(WorldSpec::new(2, 2, 1), TaskKind::NearestSearch, 1, 0);
    c.strategies.clear();
    assert!(matches!(Harness::from_config(c), Err(Error::Config(_))));
}

#[test]
fn record_then_replay_gives_the_same_report() {
    let dir = tempfile::tempdir().unwrap();
    let c = config(WorldSpec::new(5, 4, 6), TaskKind::KeyfobMatch, 10, 4);
    let (recorded, store) = Harness::from_config(c.clone()).unwrap().record().unwrap();
    let path = dir.path().join("replay.json");
    datagraph::formats::save_replay_store_file(&store, &path).unwrap();

    let mut replay = c.clone();
    replay.backend = BackendConfig::Replay { path };
    let replayed = Harness::from_config(replay).unwrap().compare().unwrap();
    assert_eq!(recorded.without_wall_clock(), replayed.without_wall_clock());

    // A different task set misses the store and every trial errors.
    let mut other = c;
    other.tasks.kind = TaskKind::NearestSearch;
    other.backend = BackendConfig::Replay {
        path: dir.path().join("replay.json"),
    };
    let missed = Harness::from_config(other).unwrap().compare().unwrap();
    assert!(missed.per_trial.iter().all(|t| t.error.is_some()));
}

// Route scenario on a 2x3 grid:
//
//   0 - 1 - 2
//   |   |   |
//   3 - 4 - 5
fn grid_2x3(hazard_at: &[u32]) -> Datagraph {
    let mut b = GraphBuilder::new();
    for id in 0..6u32 {
        let (x, y) = (f64::from(id % 3) * 4.0, f64::from(id / 3) * 4.0);
        let objects = if hazard_at.contains(&id) {
            vec![SceneObject::new("gas_canister", [x, y, 0.0], i64::from(id)).with_attribute("hazard", "true")]
        } else {
            vec![SceneObject::new("chair", [x, y, 0.0], i64::from(id))]
        };
        b.add_node(Pose::at(x, y, 0.0), Snapshot::with_objects(objects)).unwrap();
    }
    for (a, c) in [(0, 1), (1, 2), (3, 4), (4, 5), (0, 3), (1, 4), (2, 5)] {
        b.add_edge(NodeId(a), NodeId(c), true, None).unwrap();
    }
    b.seal()
}

fn route_harness(g: Datagraph, cache: bool) -> Harness {
    let mut c = config(WorldSpec::new(1, 1, 0), TaskKind::RouteHazard, 1, 0);
    c.cache_enabled = cache;
    Harness::from_parts(c, g, None, Box::new(OracleBackend)).unwrap()
}

fn simple_paths(g: &Datagraph, from: usize, to: usize) -> Vec<Vec<NodeId>> {
    let adj = common::adjacency(g);
    let mut out = Vec::new();
    let mut stack = vec![from];
    fn go(adj: &[Vec<(usize, f64)>], to: usize, stack: &mut Vec<usize>, out: &mut Vec<Vec<NodeId>>) {
        let u = *stack.last().unwrap();
        if u == to {
            out.push(stack.iter().map(|&v| NodeId(v as u32)).collect());
            return;
        }
        for &(v, _) in &adj[u] {
            if !stack.contains(&v) {
                stack.push(v);
                go(adj, to, stack, out);
                stack.pop();
            }
        }
    }
    go(&adj, to, &mut stack, &mut out);
    out
}

#[test]
fn hazard_free_route_is_accepted() {
    let (_, report) = route_harness(grid_2x3(&[]), true)
        .route_scan(&RouteRequest::new(NodeId(0), NodeId(5), Metric::Hops))
        .unwrap();
    assert!(report.verdicts.iter().all(|v| !v.satisfied));
    assert!(report.accepted);
    assert_eq!(report.path, vec![NodeId(0), NodeId(1), NodeId(2), NodeId(5)]);
}

#[test]
fn route_without_hazard_is_selected() {
    let g = grid_2x3(&[1]);
    let candidates = simple_paths(&g, 0, 5);
    // Reference choice: fewest hazard nodes, then fewest hops, then lexicographic.
    let expected = candidates
        .iter()
        .min_by_key(|p| (p.contains(&NodeId(1)) as u8, p.len(), (*p).clone()))
        .unwrap()
        .clone();
    assert_eq!(expected, vec![NodeId(0), NodeId(3), NodeId(4), NodeId(5)]);

    let mut req = RouteRequest::new(NodeId(0), NodeId(5), Metric::Hops);
    req.candidates = candidates.clone();
    let (result, report) = route_harness(g, true).route_scan(&req).unwrap();
    assert!(!report.accepted);
    assert_eq!(report.hazard_nodes, vec![NodeId(1)]);
    assert_eq!(result.satisfied_nodes().collect::<Vec<_>>(), vec![NodeId(1)]);
    assert_eq!(report.candidates[report.selected.unwrap()].path, expected);
}

#[test]
fn cached_rerun_hits_every_node() {
    let mut req = RouteRequest::new(NodeId(0), NodeId(5), Metric::Meters);
    req.passes = 2;
    let (_, report) = route_harness(grid_2x3(&[4]), true).route_scan(&req).unwrap();
    let len = report.path.len() as u64;
    assert_eq!((report.passes[0].backend_calls, report.passes[0].cache_hits), (len, 0));
    assert_eq!((report.passes[1].backend_calls, report.passes[1].cache_hits), (0, len));

    let (_, report) = route_harness(grid_2x3(&[4]), false).route_scan(&req).unwrap();
    assert_eq!(report.passes[1].cache_hits, 0);
    assert_eq!(report.passes[1].backend_calls, len);
}

#[test]
fn unreachable_goal_is_a_route_error() {
    let mut b = GraphBuilder::new();
    b.add_node(Pose::at(0.0, 0.0, 0.0), Snapshot::empty()).unwrap();
    b.add_node(Pose::at(9.0, 0.0, 0.0), Snapshot::empty()).unwrap();
    let err = route_harness(b.seal(), true)
        .route_scan(&RouteRequest::new(NodeId(0), NodeId(1), Metric::Hops))
        .unwrap_err();
    assert!(matches!(err, Error::Route(_)));
}

#[test]
fn candidate_not_joining_start_and_goal_is_rejected() {
    let mut req = RouteRequest::new(NodeId(0), NodeId(5), Metric::Hops);
    req.candidates = vec![vec![NodeId(0), NodeId(1)]];
    assert!(matches!(route_harness(grid_2x3(&[]), true).route_scan(&req), Err(Error::Route(_))));
}

fn aggregate_harness(spec: WorldSpec) -> Harness {
    Harness::from_config(config(spec, TaskKind::NearestSearch, 1, 0)).unwrap()
}

#[test]
fn aggregate_without_duplicates_is_exact() {
    let r = aggregate_harness(WorldSpec::new(5, 5, 3)).aggregate(Predicate::label("chair"), 0.5).unwrap();
    assert_eq!(r.result.raw_total, r.result.deduped_total);
    assert_eq!(Some(r.result.deduped_total), r.true_count);
    assert_eq!(r.error, Some(0));
}

#[test]
fn aggregate_merges_boundary_duplicates() {
    let spec = |seed| WorldSpec {
        boundary_duplicate_prob: 0.3,
        ..WorldSpec::new(6, 6, seed)
    };
    let chair = Predicate::label("chair");
    let seed = (0..50)
        .find(|&s| {
            let (_, t) = generate_world(&spec(s)).unwrap();
            let found = t.duplicates().any(|i| i.label == "chair");
            found
        })
        .expect("some seed injects a duplicate chair");
    let h = aggregate_harness(spec(seed));
    let merged = h.aggregate(chair.clone(), 0.5).unwrap();
    assert!(merged.result.raw_total > merged.true_count.unwrap());
    assert_eq!(merged.error, Some(0));
    assert!(!merged.result.merged_groups.is_empty());

    let raw = h.aggregate(chair, 0.0).unwrap();
    assert_eq!(raw.result.deduped_total, raw.result.raw_total);
    assert!(raw.error.unwrap() > 0);
}

#[test]
fn aggregate_report_is_written() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = config(WorldSpec::new(3, 3, 1), TaskKind::NearestSearch, 1, 0);
    c.output_dir = Some(dir.path().to_path_buf());
    Harness::from_config(c).unwrap().aggregate(Predicate::label("door"), 0.5).unwrap();
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("aggregate.json")).unwrap()).unwrap();
    assert_eq!(v["error"], 0);
    assert_eq!(v["dedup_radius_m"], 0.5);
}
