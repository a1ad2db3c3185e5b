//! Reference implementations used to check the library. They read the graph
//! only through its node and edge lists and share no code with the crates
//! under test.
#![allow(dead_code)]

use std::collections::VecDeque;

use datagraph_core::graph::{Datagraph, GraphBuilder, NodeId, Pose, SceneObject, Snapshot};
use datagraph_core::worldgen::{GroundTruth, Instance};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Adjacency lists with edge lengths, built straight from the edge list.
pub fn adjacency(g: &Datagraph) -> Vec<Vec<(usize, f64)>> {
    let mut adj = vec![Vec::new(); g.node_count()];
    for e in g.edges() {
        adj[e.a.0 as usize].push((e.b.0 as usize, e.length_m));
        adj[e.b.0 as usize].push((e.a.0 as usize, e.length_m));
    }
    adj
}

/// Hop distances by a plain FIFO breadth-first search.
pub fn bfs_hops(g: &Datagraph, src: NodeId) -> Vec<Option<u32>> {
    let adj = adjacency(g);
    let mut dist = vec![None; adj.len()];
    let mut queue = VecDeque::new();
    dist[src.0 as usize] = Some(0);
    queue.push_back(src.0 as usize);
    while let Some(u) = queue.pop_front() {
        let d = dist[u].unwrap();
        for &(v, _) in &adj[u] {
            if dist[v].is_none() {
                dist[v] = Some(d + 1);
                queue.push_back(v);
            }
        }
    }
    dist
}

/// Reachable nodes ordered by (hop distance, id).
pub fn bfs_visit_order(g: &Datagraph, src: NodeId) -> Vec<NodeId> {
    let dist = bfs_hops(g, src);
    let mut order: Vec<(u32, usize)> = dist
        .iter()
        .enumerate()
        .filter_map(|(i, d)| d.map(|d| (d, i)))
        .collect();
    order.sort();
    order.into_iter().map(|(_, i)| NodeId(i as u32)).collect()
}

/// Geodesic distances by the O(n^2) array form of Dijkstra.
pub fn dijkstra(g: &Datagraph, src: NodeId) -> Vec<Option<f64>> {
    let adj = adjacency(g);
    let n = adj.len();
    let mut dist: Vec<Option<f64>> = vec![None; n];
    let mut done = vec![false; n];
    dist[src.0 as usize] = Some(0.0);
    loop {
        let mut best: Option<(f64, usize)> = None;
        for i in 0..n {
            if let (false, Some(d)) = (done[i], dist[i]) {
                if best.is_none_or(|(bd, _)| d < bd) {
                    best = Some((d, i));
                }
            }
        }
        let Some((d, u)) = best else { break };
        done[u] = true;
        for &(v, w) in &adj[u] {
            let cand = d + w;
            if dist[v].is_none_or(|old| cand < old) {
                dist[v] = Some(cand);
            }
        }
    }
    dist
}

/// A connected graph: a random tree plus up to `extra_edges` random chords.
/// About one edge in ten is non-traversable. Each node holds a "chair" with
/// probability `chair_prob`.
pub fn random_connected_graph(seed: u64, n: usize, extra_edges: usize, chair_prob: f64) -> Datagraph {
    let mut r = rng(seed);
    let mut b = GraphBuilder::new();
    for i in 0..n {
        let pos = [r.random_range(0.0..100.0), r.random_range(0.0..100.0), 0.0];
        let mut objects = Vec::new();
        if r.random_bool(chair_prob) {
            objects.push(SceneObject::new("chair", pos, i as i64));
        }
        b.add_node(Pose::at(pos[0], pos[1], pos[2]), Snapshot::with_objects(objects)).unwrap();
    }
    let mut edges = std::collections::BTreeSet::new();
    for i in 1..n {
        let j = r.random_range(0..i);
        edges.insert((j, i));
    }
    for _ in 0..extra_edges {
        if n < 2 {
            break;
        }
        let a = r.random_range(0..n);
        let c = r.random_range(0..n);
        if a != c {
            edges.insert((a.min(c), a.max(c)));
        }
    }
    for (a, c) in edges {
        let traversable = r.random_bool(0.9);
        b.add_edge(NodeId(a as u32), NodeId(c as u32), traversable, None).unwrap();
    }
    b.seal()
}

/// Nodes whose snapshot holds an instance satisfying `pred`, per ground truth.
pub fn truth_nodes(truth: &GroundTruth, pred: impl Fn(&Instance) -> bool) -> Vec<usize> {
    let mut v: Vec<usize> = truth
        .instances
        .iter()
        .filter(|i| pred(i))
        .map(|i| i.home_node.0 as usize)
        .collect();
    v.sort_unstable();
    v.dedup();
    v
}
