//! Counting across scenes, with merging of objects seen from two nodes.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::TraversalError;
use crate::graph::{euclidean, Datagraph, NodeId, SceneObject};
use crate::query::{Backend, Query, QueryMode};
use crate::traversal::brute_force_query;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AggregateReport {
    pub per_node_counts: BTreeMap<NodeId, u64>,
    pub raw_total: u64,
    pub deduped_total: u64,
    /// Clusters of two or more matches judged to be the same physical object.
    pub merged_groups: Vec<Vec<(NodeId, SceneObject)>>,
    pub total_backend_calls: u64,
}

/// Counts matches over every node (ascending id) and merges cross-node
/// matches with equal label and attributes lying within `dedup_radius_m`
/// of each other, by single linkage. A radius of 0 disables merging.
pub fn aggregate_count<B: Backend + ?Sized>(
    graph: &Datagraph,
    backend: &B,
    query: &Query,
    dedup_radius_m: f64,
) -> Result<AggregateReport, TraversalError> {
    if query.mode != QueryMode::Count {
        return Err(TraversalError::WrongMode {
            expected: QueryMode::Count,
            found: query.mode,
        });
    }
    if !(dedup_radius_m.is_finite() && dedup_radius_m >= 0.0) {
        return Err(TraversalError::InvalidQuery("dedup radius must be finite and non-negative"));
    }
    let merging = dedup_radius_m > 0.0;
    if merging && !backend.reports_positions() {
        return Err(TraversalError::DedupUnavailable);
    }

    let run = brute_force_query(graph, backend, query, false, None, false)?;
    let mut report = AggregateReport {
        total_backend_calls: run.total_backend_calls,
        ..AggregateReport::default()
    };
    let mut detections: Vec<(NodeId, SceneObject)> = Vec::new();
    for r in run.responses {
        report.per_node_counts.insert(r.node, r.count);
        report.raw_total += r.count;
        detections.extend(r.matches.into_iter().map(|m| (r.node, m)));
    }

    report.merged_groups = if merging {
        single_linkage(&detections, dedup_radius_m)
    } else {
        Vec::new()
    };
    let merged_away: u64 = report.merged_groups.iter().map(|g| g.len() as u64 - 1).sum();
    report.deduped_total = report.raw_total.saturating_sub(merged_away);
    Ok(report)
}

fn same_object(a: &(NodeId, SceneObject), b: &(NodeId, SceneObject), radius: f64) -> bool {
    a.0 != b.0
        && a.1.label == b.1.label
        && a.1.attributes == b.1.attributes
        && euclidean(&a.1.world_position, &b.1.world_position) <= radius
}

fn single_linkage(detections: &[(NodeId, SceneObject)], radius: f64) -> Vec<Vec<(NodeId, SceneObject)>> {
    let n = detections.len();
    let mut parent: Vec<usize> = (0..n).collect();

    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }

    for i in 0..n {
        for j in (i + 1)..n {
            if same_object(&detections[i], &detections[j], radius) {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri.max(rj)] = ri.min(rj);
                }
            }
        }
    }

    let mut groups: BTreeMap<usize, Vec<(NodeId, SceneObject)>> = BTreeMap::new();
    for (i, d) in detections.iter().enumerate() {
        let root = find(&mut parent, i);
        groups.entry(root).or_default().push(d.clone());
    }
    groups.into_values().filter(|g| g.len() > 1).collect()
}
