//! Hop and geodesic distances, and shortest paths with lexicographic tie-breaking.

use alloc::collections::{BTreeMap, BinaryHeap, VecDeque};
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::GraphError;
use crate::graph::{Datagraph, NodeId};

/// Which notion of "closest" to use.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    /// Edge count.
    #[default]
    Hops,
    /// Summed edge length.
    Meters,
}

/// Edge-count distance from `source` to every reachable node.
pub fn hop_distances(
    graph: &Datagraph,
    source: NodeId,
    traversable_only: bool,
) -> Result<BTreeMap<NodeId, u32>, GraphError> {
    Ok(to_map(&hop_table(graph, source, traversable_only)?))
}

/// Shortest summed edge length from `source` to every reachable node.
pub fn geodesic_distances(
    graph: &Datagraph,
    source: NodeId,
    traversable_only: bool,
) -> Result<BTreeMap<NodeId, f64>, GraphError> {
    Ok(to_map(&geodesic_table(graph, source, traversable_only)?))
}

fn to_map<T: Copy>(table: &[Option<T>]) -> BTreeMap<NodeId, T> {
    table
        .iter()
        .enumerate()
        .filter_map(|(i, d)| d.map(|d| (NodeId(i as u32), d)))
        .collect()
}

pub(crate) fn hop_table(
    graph: &Datagraph,
    source: NodeId,
    traversable_only: bool,
) -> Result<Vec<Option<u32>>, GraphError> {
    graph.check_node(source)?;
    let mut dist = vec![None; graph.node_count()];
    dist[source.index()] = Some(0);
    let mut queue = VecDeque::from([source]);
    while let Some(v) = queue.pop_front() {
        let next = dist[v.index()].unwrap_or(0) + 1;
        for (u, _) in graph.incident(v, traversable_only) {
            if dist[u.index()].is_none() {
                dist[u.index()] = Some(next);
                queue.push_back(u);
            }
        }
    }
    Ok(dist)
}

/// Min-heap entry ordered by `(distance, node id)`.
#[derive(Clone, Copy, Debug)]
pub(crate) struct HeapEntry {
    pub dist: f64,
    pub node: NodeId,
}

impl PartialEq for HeapEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for HeapEntry {}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        // reversed: BinaryHeap is a max-heap
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.node.cmp(&self.node))
    }
}

pub(crate) fn geodesic_table(
    graph: &Datagraph,
    source: NodeId,
    traversable_only: bool,
) -> Result<Vec<Option<f64>>, GraphError> {
    graph.check_node(source)?;
    let mut dist: Vec<Option<f64>> = vec![None; graph.node_count()];
    let mut settled = vec![false; graph.node_count()];
    let mut heap = BinaryHeap::new();
    dist[source.index()] = Some(0.0);
    heap.push(HeapEntry { dist: 0.0, node: source });
    while let Some(HeapEntry { dist: d, node: v }) = heap.pop() {
        if settled[v.index()] {
            continue;
        }
        settled[v.index()] = true;
        for (u, e) in graph.incident(v, traversable_only) {
            let candidate = d + e.length_m;
            if dist[u.index()].is_none_or(|cur| candidate < cur) {
                dist[u.index()] = Some(candidate);
                heap.push(HeapEntry { dist: candidate, node: u });
            }
        }
    }
    Ok(dist)
}

const RELATIVE_SLACK: f64 = 1e-9;

/// Shortest path from `a` to `b`, or `None` when `b` is unreachable.
///
/// Among equally short paths the lexicographically smallest node-id
/// sequence wins.
pub fn shortest_path(
    graph: &Datagraph,
    a: NodeId,
    b: NodeId,
    metric: Metric,
    traversable_only: bool,
) -> Result<Option<Vec<NodeId>>, GraphError> {
    graph.check_node(a)?;
    graph.check_node(b)?;
    // Distances are taken towards `b`; walking forward from `a` and always
    // stepping to the smallest-id neighbor that stays on a shortest path
    // yields the lexicographic minimum.
    let path = match metric {
        Metric::Hops => {
            let to_goal = hop_table(graph, b, traversable_only)?;
            if to_goal[a.index()].is_none() {
                return Ok(None);
            }
            let mut path = vec![a];
            let mut cur = a;
            while cur != b {
                let here = to_goal[cur.index()].unwrap_or(0);
                let next = graph
                    .incident(cur, traversable_only)
                    .map(|(u, _)| u)
                    .find(|u| to_goal[u.index()] == Some(here.wrapping_sub(1)));
                match next {
                    Some(u) => {
                        path.push(u);
                        cur = u;
                    }
                    None => return Ok(None),
                }
            }
            path
        }
        Metric::Meters => {
            let to_goal = geodesic_table(graph, b, traversable_only)?;
            if to_goal[a.index()].is_none() {
                return Ok(None);
            }
            let mut path = vec![a];
            let mut cur = a;
            while cur != b {
                let here = to_goal[cur.index()].unwrap_or(0.0);
                let slack = RELATIVE_SLACK * here.max(1.0);
                let next = graph.incident(cur, traversable_only).find_map(|(u, e)| {
                    let there = to_goal[u.index()]?;
                    (there < here && (e.length_m + there - here).abs() <= slack).then_some(u)
                });
                match next {
                    Some(u) => {
                        path.push(u);
                        cur = u;
                    }
                    None => return Ok(None),
                }
            }
            path
        }
    };
    Ok(Some(path))
}

/// Total length of a node sequence in the given metric, or `None` when two
/// consecutive nodes are not joined by an (allowed) edge.
pub fn path_length(graph: &Datagraph, path: &[NodeId], metric: Metric, traversable_only: bool) -> Option<f64> {
    let mut total = 0.0;
    for w in path.windows(2) {
        let e = graph.edge_between(w[0], w[1])?;
        if traversable_only && !e.traversable {
            return None;
        }
        total += match metric {
            Metric::Hops => 1.0,
            Metric::Meters => e.length_m,
        };
    }
    Some(total)
}
