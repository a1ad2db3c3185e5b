//! Iterative per-node querying: proximity expansion from the agent's node,
//! querying along a path, and the spatially blind brute-force baseline.
//!
//! Every strategy queries one node at a time in a canonical order and
//! evaluates the early-stop rule in that order.

use alloc::boxed::Box;
use alloc::collections::{BTreeMap, BinaryHeap};
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{BackendError, GraphError, TraversalError};
use crate::graph::{Datagraph, NodeId};
use crate::paths::{geodesic_table, hop_table, HeapEntry, Metric};
use crate::query::{Backend, Query, QueryMode, QueryResponse};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraversalOptions {
    /// Frontier order: hop levels (breadth-first) or nondecreasing geodesic distance.
    pub metric: Metric,
    /// Ignore edges that are not marked traversable.
    pub traversable_only: bool,
}

impl TraversalOptions {
    pub fn hops() -> Self {
        Self::default()
    }

    pub fn meters() -> Self {
        TraversalOptions {
            metric: Metric::Meters,
            traversable_only: false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeDistance {
    pub hops: u32,
    pub meters: f64,
}

/// The first node whose response was satisfied, with its distance from the
/// reference node when that node reaches it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FirstHit {
    pub node: NodeId,
    pub hops: Option<u32>,
    pub meters: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TraversalResult {
    pub responses: Vec<QueryResponse>,
    pub visit_order: Vec<NodeId>,
    pub distances: BTreeMap<NodeId, NodeDistance>,
    pub total_backend_calls: u64,
    pub stopped_early: bool,
    pub first_satisfied: Option<FirstHit>,
}

impl TraversalResult {
    pub fn cache_hits(&self) -> usize {
        self.responses.iter().filter(|r| r.backend_calls == 0).count()
    }

    pub fn satisfied_nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.responses.iter().filter(|r| r.satisfied).map(|r| r.node)
    }
}

/// Lazily expanding visit order around an agent node.
///
/// With [`Metric::Hops`] nodes come out level by level, ascending id within
/// a level. With [`Metric::Meters`] they come out by nondecreasing geodesic
/// distance, ties by ascending id. Unreachable nodes never appear.
pub struct ProximityOrder<'g> {
    graph: &'g Datagraph,
    traversable_only: bool,
    state: OrderState,
}

enum OrderState {
    Levels {
        level: Vec<NodeId>,
        pos: usize,
        seen: Vec<bool>,
    },
    Geodesic {
        heap: BinaryHeap<HeapEntry>,
        best: Vec<Option<f64>>,
        settled: Vec<bool>,
    },
}

impl<'g> ProximityOrder<'g> {
    pub fn new(graph: &'g Datagraph, agent: NodeId, options: TraversalOptions) -> Result<Self, GraphError> {
        graph.check_node(agent)?;
        let n = graph.node_count();
        let state = match options.metric {
            Metric::Hops => {
                let mut seen = vec![false; n];
                seen[agent.index()] = true;
                OrderState::Levels {
                    level: vec![agent],
                    pos: 0,
                    seen,
                }
            }
            Metric::Meters => {
                let mut best = vec![None; n];
                best[agent.index()] = Some(0.0);
                let mut heap = BinaryHeap::new();
                heap.push(HeapEntry { dist: 0.0, node: agent });
                OrderState::Geodesic {
                    heap,
                    best,
                    settled: vec![false; n],
                }
            }
        };
        Ok(ProximityOrder {
            graph,
            traversable_only: options.traversable_only,
            state,
        })
    }
}

impl Iterator for ProximityOrder<'_> {
    type Item = NodeId;

    fn next(&mut self) -> Option<NodeId> {
        let graph = self.graph;
        let traversable_only = self.traversable_only;
        match &mut self.state {
            OrderState::Levels { level, pos, seen } => {
                if *pos == level.len() {
                    // Nodes are marked at discovery so none is queued twice.
                    let mut next = Vec::new();
                    for &v in level.iter() {
                        for (u, _) in graph.incident(v, traversable_only) {
                            if !seen[u.index()] {
                                seen[u.index()] = true;
                                next.push(u);
                            }
                        }
                    }
                    next.sort_unstable();
                    *level = next;
                    *pos = 0;
                }
                let v = *level.get(*pos)?;
                *pos += 1;
                Some(v)
            }
            OrderState::Geodesic { heap, best, settled } => loop {
                let HeapEntry { dist, node } = heap.pop()?;
                if settled[node.index()] {
                    continue;
                }
                settled[node.index()] = true;
                for (u, e) in graph.incident(node, traversable_only) {
                    let candidate = dist + e.length_m;
                    if !settled[u.index()] && best[u.index()].is_none_or(|cur| candidate < cur) {
                        best[u.index()] = Some(candidate);
                        heap.push(HeapEntry { dist: candidate, node: u });
                    }
                }
                return Some(node);
            },
        }
    }
}

struct Run<'a, B: ?Sized> {
    graph: &'a Datagraph,
    backend: &'a B,
    query: &'a Query,
    hops: Vec<Option<u32>>,
    meters: Vec<Option<f64>>,
    result: TraversalResult,
}

impl<'a, B: Backend + ?Sized> Run<'a, B> {
    fn start(
        graph: &'a Datagraph,
        backend: &'a B,
        query: &'a Query,
        reference: Option<NodeId>,
        traversable_only: bool,
    ) -> Result<Self, TraversalError> {
        query.check().map_err(|e| match e {
            BackendError::InvalidQuery(why) => TraversalError::InvalidQuery(why),
            _ => TraversalError::InvalidQuery("query rejected"),
        })?;
        let (hops, meters) = match reference {
            Some(r) => (
                hop_table(graph, r, traversable_only)?,
                geodesic_table(graph, r, traversable_only)?,
            ),
            None => (Vec::new(), Vec::new()),
        };
        Ok(Run {
            graph,
            backend,
            query,
            hops,
            meters,
            result: TraversalResult::default(),
        })
    }

    /// Queries `v` and records the response. Returns whether it was satisfied.
    fn visit(&mut self, v: NodeId) -> Result<bool, TraversalError> {
        let node = self.graph.node(v)?;
        let response = match self.backend.answer(node, self.query) {
            Ok(r) => r,
            Err(source) => {
                return Err(TraversalError::Backend {
                    node: v,
                    source,
                    partial: Box::new(core::mem::take(&mut self.result)),
                })
            }
        };
        let hops = self.hops.get(v.index()).copied().flatten();
        let meters = self.meters.get(v.index()).copied().flatten();
        if let (Some(hops), Some(meters)) = (hops, meters) {
            self.result.distances.insert(v, NodeDistance { hops, meters });
        }
        let satisfied = response.satisfied;
        if satisfied && self.result.first_satisfied.is_none() {
            self.result.first_satisfied = Some(FirstHit { node: v, hops, meters });
        }
        self.result.total_backend_calls += u64::from(response.backend_calls);
        self.result.visit_order.push(v);
        self.result.responses.push(response);
        Ok(satisfied)
    }

    fn run(mut self, order: impl Iterator<Item = NodeId>, stop_on_first: bool) -> Result<TraversalResult, TraversalError> {
        for v in order {
            if self.visit(v)? && stop_on_first {
                self.result.stopped_early = true;
                break;
            }
        }
        Ok(self.result)
    }
}

fn require_find_like(query: &Query) -> Result<(), TraversalError> {
    if query.mode == QueryMode::Count {
        return Err(TraversalError::WrongMode {
            expected: QueryMode::Find,
            found: query.mode,
        });
    }
    Ok(())
}

/// Queries every node reachable from `agent`, nearest first.
pub fn proximity_query_all<B: Backend + ?Sized>(
    graph: &Datagraph,
    backend: &B,
    query: &Query,
    agent: NodeId,
    options: TraversalOptions,
) -> Result<TraversalResult, TraversalError> {
    let order = ProximityOrder::new(graph, agent, options)?;
    Run::start(graph, backend, query, Some(agent), options.traversable_only)?.run(order, false)
}

/// Like [`proximity_query_all`] but stops right after the first satisfied
/// response.
pub fn proximity_search_first<B: Backend + ?Sized>(
    graph: &Datagraph,
    backend: &B,
    query: &Query,
    agent: NodeId,
    options: TraversalOptions,
) -> Result<TraversalResult, TraversalError> {
    require_find_like(query)?;
    let order = ProximityOrder::new(graph, agent, options)?;
    Run::start(graph, backend, query, Some(agent), options.traversable_only)?.run(order, true)
}

/// Queries the nodes of `path` in order, once per occurrence. Never stops early.
///
/// Distances are reported relative to the first path node.
pub fn path_query<B: Backend + ?Sized>(
    graph: &Datagraph,
    backend: &B,
    query: &Query,
    path: &[NodeId],
    traversable_only: bool,
) -> Result<TraversalResult, TraversalError> {
    let first = *path.first().ok_or(TraversalError::EmptyPath)?;
    for &v in path {
        graph.check_node(v)?;
    }
    for w in path.windows(2) {
        let ok = graph
            .edge_between(w[0], w[1])
            .is_some_and(|e| e.traversable || !traversable_only);
        if !ok {
            return Err(TraversalError::InvalidPath { from: w[0], to: w[1] });
        }
    }
    Run::start(graph, backend, query, Some(first), traversable_only)?.run(path.iter().copied(), false)
}

/// Queries every node in ascending id order with no spatial prioritization.
///
/// `reference` only affects the reported distances.
pub fn brute_force_query<B: Backend + ?Sized>(
    graph: &Datagraph,
    backend: &B,
    query: &Query,
    stop_on_first: bool,
    reference: Option<NodeId>,
    traversable_only: bool,
) -> Result<TraversalResult, TraversalError> {
    if stop_on_first {
        require_find_like(query)?;
    }
    Run::start(graph, backend, query, reference, traversable_only)?.run(graph.node_ids(), stop_on_first)
}
