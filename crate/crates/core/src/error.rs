use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;

use thiserror::Error;

use crate::graph::{NodeId, Violation};
use crate::query::QueryMode;
use crate::traversal::TraversalResult;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GraphError {
    #[error("node {0} does not exist")]
    MissingNode(NodeId),
    #[error("self-loop on node {0}")]
    SelfLoop(NodeId),
    #[error("edge {{{a}, {b}}} already exists")]
    DuplicateEdge { a: NodeId, b: NodeId },
    #[error("edge {{{a}, {b}}} has invalid length {length}")]
    InvalidLength { a: NodeId, b: NodeId, length: f64 },
    #[error("invalid pose: {0}")]
    InvalidPose(&'static str),
    #[error("invalid scene object: {0}")]
    InvalidObject(&'static str),
    #[error("graph has {} invariant violation(s)", .0.len())]
    Validation(Vec<Violation>),
}

/// Failure of a single backend call. Never paired with a fabricated response.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BackendError {
    #[error("invalid query: {0}")]
    InvalidQuery(&'static str),
    #[error("request timed out after {timeout_ms} ms")]
    Timeout { timeout_ms: u64 },
    #[error("backend answered with HTTP status {status}")]
    Protocol { status: u16, body: String },
    #[error("malformed backend response: {0}")]
    MalformedResponse(String),
    #[error("transport failure: {0}")]
    Transport(String),
    #[error("no recorded response for node {node} and query {query_hash}")]
    ReplayMiss { node: NodeId, query_hash: String },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TraversalError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("path is empty")]
    EmptyPath,
    #[error("path step {from} -> {to} does not follow an edge")]
    InvalidPath { from: NodeId, to: NodeId },
    #[error("operation requires query mode {expected:?}, got {found:?}")]
    WrongMode { expected: QueryMode, found: QueryMode },
    #[error("invalid query: {0}")]
    InvalidQuery(&'static str),
    #[error("deduplication needs object positions, which this backend does not report")]
    DedupUnavailable,
    /// The run stopped at the first failing node; `partial` holds everything answered before it.
    #[error("backend failed at node {node}: {source}")]
    Backend {
        node: NodeId,
        source: BackendError,
        partial: Box<TraversalResult>,
    },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WorldError {
    #[error("invalid world spec: {0}")]
    InvalidSpec(String),
    #[error("task unavailable: {0}")]
    TaskUnavailable(&'static str),
    #[error(transparent)]
    Graph(#[from] GraphError),
}
