//! Metrics reports and their JSON/CSV renderings.

use std::collections::BTreeMap;
use std::path::Path;

use datagraph_core::aggregate::AggregateReport;
use datagraph_core::graph::NodeId;
use datagraph_core::worldgen::TaskKind;
use datagraph_core::Metric;
use serde::{Deserialize, Serialize};

use crate::config::Strategy;
use crate::error::{Error, Result};
use crate::formats::write_json_file;

/// Column order of the per-trial CSV table. Changing it is a format break.
pub const CSV_HEADER: [&str; 14] = [
    "task_id",
    "strategy",
    "task_kind",
    "agent_node",
    "found_node",
    "backend_calls",
    "hops_of_found",
    "meters_of_found",
    "optimal_hops",
    "optimal_meters",
    "found_is_closest",
    "cache_hits",
    "wall_time_ms",
    "error",
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub task_id: u32,
    pub strategy: Strategy,
    pub task_kind: TaskKind,
    pub agent_node: NodeId,
    pub found_node: Option<NodeId>,
    pub backend_calls: u64,
    pub hops_of_found: Option<u32>,
    pub meters_of_found: Option<f64>,
    pub optimal_hops: Option<u32>,
    pub optimal_meters: Option<f64>,
    pub found_is_closest: bool,
    pub wall_time_ms: f64,
    pub cache_hits: u64,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StrategySummary {
    pub trials: u32,
    pub errored: u32,
    pub mean_backend_calls: f64,
    pub median_backend_calls: f64,
    pub closest_rate: f64,
    pub total_wall_time_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub metric: Metric,
    pub per_trial: Vec<TrialRecord>,
    pub summary: BTreeMap<Strategy, StrategySummary>,
}

fn median(sorted: &[u64]) -> f64 {
    match sorted.len() {
        0 => 0.0,
        n if n % 2 == 1 => sorted[n / 2] as f64,
        n => (sorted[n / 2 - 1] as f64 + sorted[n / 2] as f64) / 2.0,
    }
}

impl MetricsReport {
    /// Sorts trials by (task_id, strategy) and computes the summaries.
    pub fn from_trials(metric: Metric, mut per_trial: Vec<TrialRecord>) -> Self {
        per_trial.sort_by_key(|t| (t.task_id, t.strategy));
        let mut summary = BTreeMap::new();
        let strategies: std::collections::BTreeSet<Strategy> = per_trial.iter().map(|t| t.strategy).collect();
        for s in strategies {
            let rows: Vec<&TrialRecord> = per_trial.iter().filter(|t| t.strategy == s).collect();
            let n = rows.len();
            let mut calls: Vec<u64> = rows.iter().map(|t| t.backend_calls).collect();
            calls.sort_unstable();
            summary.insert(
                s,
                StrategySummary {
                    trials: n as u32,
                    errored: rows.iter().filter(|t| t.error.is_some()).count() as u32,
                    mean_backend_calls: calls.iter().sum::<u64>() as f64 / n as f64,
                    median_backend_calls: median(&calls),
                    closest_rate: rows.iter().filter(|t| t.found_is_closest).count() as f64 / n as f64,
                    total_wall_time_ms: rows.iter().map(|t| t.wall_time_ms).sum(),
                },
            );
        }
        MetricsReport {
            metric,
            per_trial,
            summary,
        }
    }

    pub fn has_errors(&self) -> bool {
        self.per_trial.iter().any(|t| t.error.is_some())
    }

    /// A copy with every wall-clock field zeroed, for reproducibility checks.
    pub fn without_wall_clock(&self) -> Self {
        let mut r = self.clone();
        for t in &mut r.per_trial {
            t.wall_time_ms = 0.0;
        }
        for s in r.summary.values_mut() {
            s.total_wall_time_ms = 0.0;
        }
        r
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes infallibly");
        s.push('\n');
        s
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(CSV_HEADER)?;
        for t in &self.per_trial {
            let opt = |v: Option<String>| v.unwrap_or_default();
            w.write_record([
                t.task_id.to_string(),
                t.strategy.as_str().to_string(),
                serde_json::to_value(t.task_kind)
                    .ok()
                    .and_then(|v| v.as_str().map(str::to_string))
                    .unwrap_or_default(),
                t.agent_node.0.to_string(),
                opt(t.found_node.map(|n| n.0.to_string())),
                t.backend_calls.to_string(),
                opt(t.hops_of_found.map(|h| h.to_string())),
                opt(t.meters_of_found.map(|m| m.to_string())),
                opt(t.optimal_hops.map(|h| h.to_string())),
                opt(t.optimal_meters.map(|m| m.to_string())),
                t.found_is_closest.to_string(),
                t.cache_hits.to_string(),
                t.wall_time_ms.to_string(),
                opt(t.error.clone()),
            ])?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Config(format!("csv buffer: {e}")))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeVerdict {
    pub node: NodeId,
    pub satisfied: bool,
    pub text: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PassStats {
    pub pass: u32,
    pub backend_calls: u64,
    pub cache_hits: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CandidateRoute {
    pub path: Vec<NodeId>,
    pub hazard_nodes: Vec<NodeId>,
    pub hops: u32,
    pub meters: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RouteScanReport {
    pub start: NodeId,
    pub goal: NodeId,
    pub metric: Metric,
    pub path: Vec<NodeId>,
    pub verdicts: Vec<NodeVerdict>,
    pub hazard_nodes: Vec<NodeId>,
    /// True when the shortest path has no hazard-positive node.
    pub accepted: bool,
    pub passes: Vec<PassStats>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub candidates: Vec<CandidateRoute>,
    /// Index into `candidates` of the preferred route.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub selected: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AggregateRunReport {
    pub query_text: String,
    pub dedup_radius_m: f64,
    pub result: AggregateReport,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub true_count: Option<u64>,
    /// `deduped_total - true_count`, when ground truth is known.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<i64>,
}

pub fn write_report<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    write_json_file(path, value)
}
