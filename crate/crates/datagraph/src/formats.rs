//! JSON documents: the graph file, the ground-truth sidecar, world specs,
//! and replay stores.
//!
//! Graph document layout:
//!
//! ```text
//! { "format_version": 1,
//!   "nodes": [ { "id": 0,
//!                "pose": { "position": [x, y, z], "orientation": [w, x, y, z] },
//!                "snapshot": { "objects": [ { "label", "attributes", "world_position", "instance_id" } ],
//!                              "payload_ref": "..." } } ],
//!   "edges": [ { "a": 0, "b": 1, "traversable": true, "length_m": 4.0 } ] }
//! ```
//!
//! `orientation` and `payload_ref` are omitted when absent. Node ids must run
//! `0..n` in file order. Floats are written in shortest round-trip form and
//! parsed with correct rounding, so a save/load cycle is bit-exact.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use datagraph_core::graph::{Datagraph, Edge, Node};
use datagraph_core::query::{ReplayStore, REPLAY_FORMAT_VERSION};
use datagraph_core::worldgen::{GroundTruth, Instance, WorldSpec};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const GRAPH_FORMAT_VERSION: u32 = 1;
pub const GROUND_TRUTH_FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct GraphDocument {
    format_version: u32,
    nodes: Vec<Node>,
    edges: Vec<Edge>,
}

#[derive(Serialize, Deserialize)]
struct GroundTruthDocument {
    format_version: u32,
    instances: Vec<Instance>,
}

fn check_version(origin: &str, found: u32, expected: u32) -> Result<()> {
    if found != expected {
        return Err(Error::FormatVersion {
            origin: origin.to_string(),
            found,
            expected,
        });
    }
    Ok(())
}

fn parse<T: DeserializeOwned>(origin: &str, text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::parse(origin, &e))
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("document types serialize infallibly");
    text.push('\n');
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn graph_to_string(graph: &Datagraph) -> String {
    let doc = GraphDocument {
        format_version: GRAPH_FORMAT_VERSION,
        nodes: graph.nodes().to_vec(),
        edges: graph.edges().to_vec(),
    };
    serde_json::to_string_pretty(&doc).expect("graph document serializes infallibly")
}

/// Parses a graph document. Nothing is returned unless the whole document
/// parses and the resulting graph passes validation.
pub fn graph_from_str(text: &str, origin: &str) -> Result<Datagraph> {
    let doc: GraphDocument = parse(origin, text)?;
    check_version(origin, doc.format_version, GRAPH_FORMAT_VERSION)?;
    Ok(Datagraph::from_parts(doc.nodes, doc.edges)?)
}

pub fn save_graph(graph: &Datagraph, mut out: impl Write) -> std::io::Result<()> {
    out.write_all(graph_to_string(graph).as_bytes())?;
    out.write_all(b"\n")
}

pub fn load_graph(mut input: impl Read, origin: &str) -> Result<Datagraph> {
    let mut text = String::new();
    input.read_to_string(&mut text).map_err(|e| Error::io(origin, e))?;
    graph_from_str(&text, origin)
}

pub fn save_graph_file(graph: &Datagraph, path: &Path) -> Result<()> {
    let doc = GraphDocument {
        format_version: GRAPH_FORMAT_VERSION,
        nodes: graph.nodes().to_vec(),
        edges: graph.edges().to_vec(),
    };
    write_json(path, &doc)
}

pub fn load_graph_file(path: &Path) -> Result<Datagraph> {
    graph_from_str(&read_text(path)?, &path.display().to_string())
}

/// Parses a graph document without validating it, for linting.
pub fn lint_graph_file(path: &Path) -> Result<Vec<datagraph_core::Violation>> {
    let origin = path.display().to_string();
    let doc: GraphDocument = parse(&origin, &read_text(path)?)?;
    check_version(&origin, doc.format_version, GRAPH_FORMAT_VERSION)?;
    match Datagraph::from_parts(doc.nodes, doc.edges) {
        Ok(_) => Ok(Vec::new()),
        Err(datagraph_core::GraphError::Validation(v)) => Ok(v),
        Err(e) => Err(e.into()),
    }
}

pub fn save_ground_truth_file(truth: &GroundTruth, path: &Path) -> Result<()> {
    write_json(
        path,
        &GroundTruthDocument {
            format_version: GROUND_TRUTH_FORMAT_VERSION,
            instances: truth.instances.clone(),
        },
    )
}

pub fn load_ground_truth_file(path: &Path) -> Result<GroundTruth> {
    let origin = path.display().to_string();
    let doc: GroundTruthDocument = parse(&origin, &read_text(path)?)?;
    check_version(&origin, doc.format_version, GROUND_TRUTH_FORMAT_VERSION)?;
    Ok(GroundTruth {
        instances: doc.instances,
    })
}

pub fn load_world_spec_file(path: &Path) -> Result<WorldSpec> {
    parse(&path.display().to_string(), &read_text(path)?)
}

pub fn save_world_spec_file(spec: &WorldSpec, path: &Path) -> Result<()> {
    write_json(path, spec)
}

pub fn replay_store_to_string(store: &ReplayStore) -> String {
    serde_json::to_string_pretty(store).expect("replay store serializes infallibly")
}

pub fn replay_store_from_str(text: &str, origin: &str) -> Result<ReplayStore> {
    let store: ReplayStore = parse(origin, text)?;
    check_version(origin, store.format_version, REPLAY_FORMAT_VERSION)?;
    Ok(store)
}

pub fn save_replay_store_file(store: &ReplayStore, path: &Path) -> Result<()> {
    write_json(path, store)
}

pub fn load_replay_store_file(path: &Path) -> Result<ReplayStore> {
    replay_store_from_str(&read_text(path)?, &path.display().to_string())
}

pub(crate) fn write_json_file<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    write_json(path, value)
}

pub(crate) fn read_json_file<T: DeserializeOwned>(path: &Path) -> Result<T> {
    parse(&path.display().to_string(), &read_text(path)?)
}
