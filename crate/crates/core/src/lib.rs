//! Spatial datagraph core: rooms (or any areas) become nodes holding a pose
//! and a scene snapshot, and a context-limited query engine is driven over
//! them one node at a time, nearest areas first or along a route.
//!
//! This crate is `no_std` + `alloc`. File formats, the HTTP backend, caching
//! and the experiment harness live in the `datagraph` crate.

#![no_std]
extern crate alloc;

pub mod aggregate;
pub mod error;
pub mod graph;
pub mod paths;
pub mod query;
pub mod traversal;
pub mod worldgen;

pub use aggregate::{aggregate_count, AggregateReport};
pub use error::{BackendError, GraphError, TraversalError, WorldError};
pub use graph::{Datagraph, Edge, GraphBuilder, Node, NodeId, Pose, SceneObject, Snapshot, Violation};
pub use paths::{geodesic_distances, hop_distances, shortest_path, Metric};
pub use query::{
    oracle_answer, predicate_eval, replay_answer, Backend, OracleBackend, Predicate, Query, QueryMode,
    QueryResponse, ReplayBackend, ReplayStore,
};
pub use traversal::{
    brute_force_query, path_query, proximity_query_all, proximity_search_first, FirstHit, NodeDistance,
    ProximityOrder, TraversalOptions, TraversalResult,
};
pub use worldgen::{generate_world, ground_truth_nearest, GroundTruth, NearestHit, TaskKind, TaskSpec, WorldSpec};
