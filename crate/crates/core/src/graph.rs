//! The datagraph: nodes pairing a pose with a scene snapshot, joined by
//! undirected edges between neighboring areas.
//!
//! Graphs are built with [`GraphBuilder`] and sealed into an immutable
//! [`Datagraph`]. Adjacency lists are kept sorted by neighbor id so every
//! traversal over a sealed graph is deterministic.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::error::GraphError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl NodeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<u32> for NodeId {
    fn from(v: u32) -> Self {
        NodeId(v)
    }
}

const QUATERNION_NORM_TOLERANCE: f64 = 1e-9;

/// Position in meters plus an optional unit quaternion `(w, x, y, z)`.
///
/// Orientation is carried for backends that want it; distances ignore it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub position: [f64; 3],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub orientation: Option<[f64; 4]>,
}

impl Pose {
    pub fn at(x: f64, y: f64, z: f64) -> Self {
        Pose {
            position: [x, y, z],
            orientation: None,
        }
    }

    pub fn with_orientation(mut self, wxyz: [f64; 4]) -> Self {
        self.orientation = Some(wxyz);
        self
    }

    pub fn check(&self) -> Result<(), GraphError> {
        if !self.position.iter().all(|c| c.is_finite()) {
            return Err(GraphError::InvalidPose("position has a non-finite component"));
        }
        if let Some(q) = self.orientation {
            let norm = libm::sqrt(q.iter().map(|c| c * c).sum::<f64>());
            if !norm.is_finite() || (norm - 1.0).abs() > QUATERNION_NORM_TOLERANCE {
                return Err(GraphError::InvalidPose("orientation is not a unit quaternion"));
            }
        }
        Ok(())
    }

    pub fn distance_to(&self, other: &Pose) -> f64 {
        euclidean(&self.position, &other.position)
    }
}

pub fn euclidean(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dz = a[2] - b[2];
    libm::sqrt(dx * dx + dy * dy + dz * dz)
}

/// An annotated object visible in a node's scene.
///
/// `instance_id` is ground-truth bookkeeping; backends simulating a model's
/// view must not rely on it. Remote backends report `-1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SceneObject {
    pub label: String,
    #[serde(default)]
    pub attributes: BTreeMap<String, String>,
    pub world_position: [f64; 3],
    pub instance_id: i64,
}

impl SceneObject {
    pub fn new(label: impl Into<String>, world_position: [f64; 3], instance_id: i64) -> Self {
        SceneObject {
            label: label.into(),
            attributes: BTreeMap::new(),
            world_position,
            instance_id,
        }
    }

    pub fn with_attribute(mut self, key: impl Into<String>, value: impl Into<String>) -> Self {
        self.attributes.insert(key.into(), value.into());
        self
    }

    fn check(&self) -> Result<(), GraphError> {
        if self.label.is_empty() {
            return Err(GraphError::InvalidObject("label is empty"));
        }
        if !self.world_position.iter().all(|c| c.is_finite()) {
            return Err(GraphError::InvalidObject("world position is not finite"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    #[serde(default)]
    pub objects: Vec<SceneObject>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub payload_ref: Option<String>,
}

impl Snapshot {
    pub fn empty() -> Self {
        Snapshot::default()
    }

    pub fn with_objects(objects: Vec<SceneObject>) -> Self {
        Snapshot {
            objects,
            payload_ref: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub id: NodeId,
    pub pose: Pose,
    pub snapshot: Snapshot,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub a: NodeId,
    pub b: NodeId,
    pub traversable: bool,
    pub length_m: f64,
}

impl Edge {
    pub fn other(&self, v: NodeId) -> NodeId {
        if self.a == v {
            self.b
        } else {
            self.a
        }
    }
}

/// Construction phase of a [`Datagraph`]. Consumed by [`GraphBuilder::seal`].
#[derive(Debug, Default, Clone)]
pub struct GraphBuilder {
    nodes: Vec<Node>,
    edges: Vec<Edge>,
    pairs: BTreeSet<(NodeId, NodeId)>,
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn node(&self, id: NodeId) -> Option<&Node> {
        self.nodes.get(id.index())
    }

    pub fn add_node(&mut self, pose: Pose, snapshot: Snapshot) -> Result<NodeId, GraphError> {
        pose.check()?;
        for obj in &snapshot.objects {
            obj.check()?;
        }
        let id = NodeId(self.nodes.len() as u32);
        self.nodes.push(Node { id, pose, snapshot });
        Ok(id)
    }

    /// Connects two areas. A missing `length_m` defaults to the Euclidean
    /// distance between the endpoint poses.
    pub fn add_edge(
        &mut self,
        a: NodeId,
        b: NodeId,
        traversable: bool,
        length_m: Option<f64>,
    ) -> Result<(), GraphError> {
        let pa = self.nodes.get(a.index()).ok_or(GraphError::MissingNode(a))?.pose;
        let pb = self.nodes.get(b.index()).ok_or(GraphError::MissingNode(b))?.pose;
        if a == b {
            return Err(GraphError::SelfLoop(a));
        }
        let key = ordered_pair(a, b);
        if self.pairs.contains(&key) {
            return Err(GraphError::DuplicateEdge { a: key.0, b: key.1 });
        }
        let length = length_m.unwrap_or_else(|| pa.distance_to(&pb));
        if !(length.is_finite() && length > 0.0) {
            return Err(GraphError::InvalidLength { a, b, length });
        }
        self.pairs.insert(key);
        self.edges.push(Edge {
            a,
            b,
            traversable,
            length_m: length,
        });
        Ok(())
    }

    pub fn seal(self) -> Datagraph {
        let adjacency = build_adjacency(self.nodes.len(), &self.edges);
        Datagraph {
            nodes: self.nodes,
            edges: self.edges,
            adjacency,
        }
    }
}

fn ordered_pair(a: NodeId, b: NodeId) -> (NodeId, NodeId) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

fn build_adjacency(node_count: usize, edges: &[Edge]) -> Vec<Vec<(NodeId, usize)>> {
    let mut adjacency = alloc::vec![Vec::new(); node_count];
    for (idx, e) in edges.iter().enumerate() {
        if e.a.index() < node_count && e.b.index() < node_count {
            adjacency[e.a.index()].push((e.b, idx));
            if e.a != e.b {
                adjacency[e.b.index()].push((e.a, idx));
            }
        }
    }
    for list in &mut adjacency {
        list.sort_by_key(|&(n, idx)| (n, idx));
    }
    adjacency
}

/// A sealed, immutable datagraph.
#[derive(Debug, Clone, PartialEq)]
pub struct Datagraph {
    nodes: Vec<Node>,
    edges: Vec<Edge>,
    adjacency: Vec<Vec<(NodeId, usize)>>,
}

impl Datagraph {
    /// Reassembles a graph from stored nodes and edges, rejecting it if any
    /// invariant is violated.
    pub fn from_parts(nodes: Vec<Node>, edges: Vec<Edge>) -> Result<Self, GraphError> {
        let adjacency = build_adjacency(nodes.len(), &edges);
        let graph = Datagraph {
            nodes,
            edges,
            adjacency,
        };
        let violations = graph.validate();
        if violations.is_empty() {
            Ok(graph)
        } else {
            Err(GraphError::Validation(violations))
        }
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn node_ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.nodes.len() as u32).map(NodeId)
    }

    pub fn contains(&self, id: NodeId) -> bool {
        id.index() < self.nodes.len()
    }

    pub fn node(&self, id: NodeId) -> Result<&Node, GraphError> {
        self.nodes.get(id.index()).ok_or(GraphError::MissingNode(id))
    }

    pub fn check_node(&self, id: NodeId) -> Result<(), GraphError> {
        self.node(id).map(|_| ())
    }

    /// Adjacent `(neighbor, edge)` pairs in ascending neighbor order.
    pub fn incident(
        &self,
        v: NodeId,
        traversable_only: bool,
    ) -> impl Iterator<Item = (NodeId, &Edge)> + '_ {
        self.adjacency
            .get(v.index())
            .map(|l| l.as_slice())
            .unwrap_or(&[])
            .iter()
            .map(move |&(n, idx)| (n, &self.edges[idx]))
            .filter(move |(_, e)| !traversable_only || e.traversable)
    }

    pub fn neighbors(&self, v: NodeId, traversable_only: bool) -> Result<Vec<NodeId>, GraphError> {
        self.check_node(v)?;
        Ok(self.incident(v, traversable_only).map(|(n, _)| n).collect())
    }

    pub fn edge_between(&self, a: NodeId, b: NodeId) -> Option<&Edge> {
        let list = self.adjacency.get(a.index())?;
        list.binary_search_by_key(&b, |&(n, _)| n)
            .ok()
            .map(|pos| &self.edges[list[pos].1])
    }

    /// Lists every broken invariant. An empty list means the graph is well formed.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let n = self.nodes.len();

        for (index, node) in self.nodes.iter().enumerate() {
            if node.id.index() != index {
                out.push(Violation::NodeIdMismatch {
                    index,
                    id: node.id,
                });
            }
            if let Err(e) = node.pose.check() {
                out.push(Violation::InvalidPose {
                    node: NodeId(index as u32),
                    reason: format!("{e}"),
                });
            }
            for obj in &node.snapshot.objects {
                if let Err(e) = obj.check() {
                    out.push(Violation::InvalidObject {
                        node: NodeId(index as u32),
                        instance_id: obj.instance_id,
                        reason: format!("{e}"),
                    });
                }
            }
        }

        let mut seen = BTreeSet::new();
        for (idx, e) in self.edges.iter().enumerate() {
            for end in [e.a, e.b] {
                if end.index() >= n {
                    out.push(Violation::DanglingEndpoint { edge: idx, node: end });
                }
            }
            if e.a == e.b {
                out.push(Violation::SelfLoop { edge: idx, node: e.a });
            }
            if !(e.length_m.is_finite() && e.length_m > 0.0) {
                out.push(Violation::InvalidLength {
                    a: e.a,
                    b: e.b,
                    length_m: e.length_m,
                });
            }
            if !seen.insert(ordered_pair(e.a, e.b)) {
                out.push(Violation::DuplicateEdge { a: e.a, b: e.b });
            }
        }

        if self.adjacency.len() != n {
            out.push(Violation::AdjacencyShape {
                expected: n,
                found: self.adjacency.len(),
            });
            return out;
        }
        for (index, list) in self.adjacency.iter().enumerate() {
            let v = NodeId(index as u32);
            if list.windows(2).any(|w| w[0].0 >= w[1].0) {
                out.push(Violation::UnsortedAdjacency { node: v });
            }
            for &(u, edge_idx) in list {
                let matches_edge = self
                    .edges
                    .get(edge_idx)
                    .is_some_and(|e| (e.a == v && e.b == u) || (e.b == v && e.a == u));
                if !matches_edge {
                    out.push(Violation::AdjacencyEdgeMismatch { node: v, neighbor: u });
                    continue;
                }
                let back = self
                    .adjacency
                    .get(u.index())
                    .is_some_and(|l| l.iter().any(|&(w, _)| w == v));
                if !back {
                    out.push(Violation::AsymmetricAdjacency { from: v, to: u });
                }
            }
        }
        for (idx, e) in self.edges.iter().enumerate() {
            if e.a.index() < n && e.b.index() < n && e.a != e.b {
                let listed = self.adjacency[e.a.index()].iter().any(|&(_, i)| i == idx)
                    && self.adjacency[e.b.index()].iter().any(|&(_, i)| i == idx);
                if !listed {
                    out.push(Violation::UnlistedEdge { edge: idx });
                }
            }
        }
        out
    }

    #[cfg(test)]
    pub(crate) fn adjacency_mut(&mut self) -> &mut Vec<Vec<(NodeId, usize)>> {
        &mut self.adjacency
    }

    #[cfg(test)]
    pub(crate) fn edges_mut(&mut self) -> &mut Vec<Edge> {
        &mut self.edges
    }
}

/// A broken graph invariant, naming the offending ids.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    NodeIdMismatch { index: usize, id: NodeId },
    InvalidPose { node: NodeId, reason: String },
    InvalidObject { node: NodeId, instance_id: i64, reason: String },
    DanglingEndpoint { edge: usize, node: NodeId },
    SelfLoop { edge: usize, node: NodeId },
    InvalidLength { a: NodeId, b: NodeId, length_m: f64 },
    DuplicateEdge { a: NodeId, b: NodeId },
    AdjacencyShape { expected: usize, found: usize },
    UnsortedAdjacency { node: NodeId },
    AdjacencyEdgeMismatch { node: NodeId, neighbor: NodeId },
    AsymmetricAdjacency { from: NodeId, to: NodeId },
    UnlistedEdge { edge: usize },
}

impl Violation {
    /// Short name of the invariant this violation breaks.
    pub fn invariant(&self) -> &'static str {
        match self {
            Violation::NodeIdMismatch { .. } => "dense-node-ids",
            Violation::InvalidPose { .. } => "pose",
            Violation::InvalidObject { .. } => "scene-object",
            Violation::DanglingEndpoint { .. } => "edge-endpoints-exist",
            Violation::SelfLoop { .. } => "no-self-loops",
            Violation::InvalidLength { .. } => "positive-edge-length",
            Violation::DuplicateEdge { .. } => "unique-edge-per-pair",
            Violation::AdjacencyShape { .. } => "adjacency-per-node",
            Violation::UnsortedAdjacency { .. } => "sorted-adjacency",
            Violation::AdjacencyEdgeMismatch { .. } => "adjacency-matches-edges",
            Violation::AsymmetricAdjacency { .. } => "symmetric-adjacency",
            Violation::UnlistedEdge { .. } => "edges-in-adjacency",
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] ", self.invariant())?;
        match self {
            Violation::NodeIdMismatch { index, id } => {
                write!(f, "node at index {index} carries id {id}")
            }
            Violation::InvalidPose { node, reason } => write!(f, "node {node}: {reason}"),
            Violation::InvalidObject {
                node,
                instance_id,
                reason,
            } => write!(f, "node {node}, instance {instance_id}: {reason}"),
            Violation::DanglingEndpoint { edge, node } => {
                write!(f, "edge #{edge} references missing node {node}")
            }
            Violation::SelfLoop { edge, node } => write!(f, "edge #{edge} loops on node {node}"),
            Violation::InvalidLength { a, b, length_m } => {
                write!(f, "edge {{{a}, {b}}} has length {length_m}")
            }
            Violation::DuplicateEdge { a, b } => write!(f, "edge {{{a}, {b}}} appears twice"),
            Violation::AdjacencyShape { expected, found } => {
                write!(f, "{found} adjacency lists for {expected} nodes")
            }
            Violation::UnsortedAdjacency { node } => {
                write!(f, "neighbors of node {node} are not in ascending order")
            }
            Violation::AdjacencyEdgeMismatch { node, neighbor } => {
                write!(f, "adjacency {node} -> {neighbor} points at the wrong edge")
            }
            Violation::AsymmetricAdjacency { from, to } => {
                write!(f, "{to} is adjacent to {from} but not the reverse")
            }
            Violation::UnlistedEdge { edge } => {
                write!(f, "edge #{edge} missing from adjacency lists")
            }
        }
    }
}
