use std::path::Path;
use std::process::{Command, Output};

use datagraph::mock::{fixtures, MockServer};

fn datagraph(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_datagraph"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn gen(dir: &Path) {
    let out = datagraph(&["gen", "--width", "5", "--height", "5", "--seed", "3", "--out", p(dir)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn gen_then_validate() {
    let dir = tempfile::tempdir().unwrap();
    gen(dir.path());
    let out = datagraph(&["validate", p(&dir.path().join("graph.json"))]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).ends_with("ok\n"));
}

#[test]
fn validate_reports_violations() {
    let dir = tempfile::tempdir().unwrap();
    gen(dir.path());
    let path = dir.path().join("graph.json");
    let mut v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    v["edges"][0]["length_m"] = serde_json::json!(-1.0);
    std::fs::write(&path, v.to_string()).unwrap();
    let out = datagraph(&["validate", p(&path)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!out.stdout.is_empty());

    std::fs::write(&path, "{\"format_version\": 1, \"nodes\": [").unwrap();
    let out = datagraph(&["validate", p(&path)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("graph.json"));
}

#[test]
fn compare_from_config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("experiment.json");
    let out_dir = dir.path().join("reports");
    std::fs::write(
        &config,
        serde_json::json!({
            "world": {"spec": {
                "grid_w": 4, "grid_h": 4, "room_size_m": 4.0, "door_prob": 0.3,
                "catalog": [{"label": "chair", "weight": 1.0}],
                "objects_per_room_mean": 1.0, "boundary_duplicate_prob": 0.0, "seed": 5}},
            "tasks": {"kind": "nearest_search", "count": 10, "seed": 1},
            "report_formats": ["json"]
        })
        .to_string(),
    )
    .unwrap();
    let out = datagraph(&["compare", "--config", p(&config), "--tasks", "4", "--format", "csv", "--out", p(&out_dir)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("proximity"));
    let csv = std::fs::read_to_string(out_dir.join("compare.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 4 * 2);
    assert!(!out_dir.join("compare.json").exists());
}

#[test]
fn replay_record_then_run() {
    let dir = tempfile::tempdir().unwrap();
    gen(dir.path());
    let store = dir.path().join("replay.json");
    let (graph, truth) = (dir.path().join("graph.json"), dir.path().join("ground_truth.json"));
    let world = ["--graph", p(&graph), "--ground-truth", p(&truth)];
    let mut args = vec!["replay-record"];
    args.extend(world);
    args.extend(["--tasks", "5", "--store", p(&store)]);
    assert!(datagraph(&args).status.success());
    assert!(store.exists());

    let mut args = vec!["replay-run"];
    args.extend(world);
    args.extend(["--tasks", "5", "--store", p(&store)]);
    let out = datagraph(&args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    // More tasks than were recorded: the extra ones miss and the run exits 1.
    let mut args = vec!["replay-run"];
    args.extend(world);
    args.extend(["--tasks", "40", "--store", p(&store)]);
    assert_eq!(datagraph(&args).status.code(), Some(1));
}

#[test]
fn compare_against_failing_remote_exits_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    gen(dir.path());
    let server = MockServer::always(None, fixtures::server_error()).unwrap();
    let out = datagraph(&[
        "compare",
        "--graph",
        p(&dir.path().join("graph.json")),
        "--ground-truth",
        p(&dir.path().join("ground_truth.json")),
        "--backend",
        "remote",
        "--remote-url",
        &server.base_url(),
        "--tasks",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(server.requests().len() >= 4);
}

#[test]
fn route_and_aggregate_print_json() {
    let dir = tempfile::tempdir().unwrap();
    gen(dir.path());
    let graph = dir.path().join("graph.json");
    let out = datagraph(&["route", "--graph", p(&graph), "--start", "0", "--goal", "24", "--passes", "2"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let len = v["path"].as_array().unwrap().len();
    assert_eq!(v["passes"][1]["cache_hits"], len);

    let out = datagraph(&["route", "--graph", p(&graph), "--start", "0", "--goal", "99"]);
    assert_eq!(out.status.code(), Some(2));

    let out = datagraph(&[
        "aggregate",
        "--graph",
        p(&graph),
        "--ground-truth",
        p(&dir.path().join("ground_truth.json")),
        "--label",
        "chair",
    ]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["error"], 0);
}

#[test]
fn missing_world_is_a_usage_error() {
    let out = datagraph(&["compare"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no world"));
}
