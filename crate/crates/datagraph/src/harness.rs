//! Experiment runner: strategy comparison, route scanning and counting.
//!
//! Ground truth is used to generate tasks and to score results. It is
//! never handed to a traversal.

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use datagraph_core::aggregate::aggregate_count;
use datagraph_core::graph::{Datagraph, NodeId};
use datagraph_core::paths::{path_length, shortest_path};
use datagraph_core::query::{Backend, OracleBackend, Predicate, Query, ReplayBackend, ReplayStore};
use datagraph_core::traversal::{brute_force_query, proximity_search_first, TraversalOptions, TraversalResult};
use datagraph_core::worldgen::{generate_world, ground_truth_nearest, hazard_query, make_task, GroundTruth, TaskSpec, WorldSpec};
use datagraph_core::{Metric, TraversalError};

use crate::cache::CachedBackend;
use crate::config::{BackendConfig, ExperimentConfig, ReportFormat, Strategy, WorldSource};
use crate::error::{Error, Result};
use crate::formats::{load_graph_file, load_ground_truth_file, load_replay_store_file, save_graph_file, save_ground_truth_file};
use crate::record::RecordingBackend;
use crate::remote::RemoteBackend;
use crate::report::{
    write_report, AggregateRunReport, CandidateRoute, MetricsReport, NodeVerdict, PassStats, RouteScanReport,
    TrialRecord,
};

pub type SharedBackend = Box<dyn Backend + Send + Sync>;

/// Seed of the `i`-th task derived from the configured task seed.
pub fn task_seed(seed: u64, i: u32) -> u64 {
    seed ^ u64::from(i).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Relative tolerance when comparing geodesic distances.
const METERS_REL_TOL: f64 = 1e-9;

fn same_distance(metric: Metric, found: (Option<u32>, Option<f64>), best: (Option<u32>, Option<f64>)) -> bool {
    match metric {
        Metric::Hops => found.0.is_some() && found.0 == best.0,
        Metric::Meters => match (found.1, best.1) {
            (Some(f), Some(b)) => (f - b).abs() <= METERS_REL_TOL * b.abs().max(1.0),
            _ => false,
        },
    }
}

pub fn build_backend(config: &BackendConfig) -> Result<SharedBackend> {
    Ok(match config {
        BackendConfig::Oracle => Box::new(OracleBackend),
        BackendConfig::Replay { path } => Box::new(ReplayBackend::new(load_replay_store_file(path)?)),
        BackendConfig::Remote(remote) => Box::new(RemoteBackend::new(remote.clone())?),
    })
}

pub fn load_world(source: &WorldSource) -> Result<(Datagraph, Option<GroundTruth>)> {
    match source {
        WorldSource::Spec(spec) => {
            let (g, t) = generate_world(spec)?;
            Ok((g, Some(t)))
        }
        WorldSource::Files { graph, ground_truth } => {
            let g = load_graph_file(graph)?;
            let t = ground_truth.as_deref().map(load_ground_truth_file).transpose()?;
            Ok((g, t))
        }
    }
}

/// Generates a world and writes `graph.json` and `ground_truth.json` into `dir`.
pub fn write_world(spec: &WorldSpec, dir: &Path) -> Result<(PathBuf, PathBuf)> {
    let (g, t) = generate_world(spec)?;
    let graph_path = dir.join("graph.json");
    let truth_path = dir.join("ground_truth.json");
    save_graph_file(&g, &graph_path)?;
    save_ground_truth_file(&t, &truth_path)?;
    Ok((graph_path, truth_path))
}

#[derive(Clone, Debug, PartialEq)]
pub struct RouteRequest {
    pub start: NodeId,
    pub goal: NodeId,
    pub metric: Metric,
    /// Alternative routes from `start` to `goal` to rank by hazard count.
    pub candidates: Vec<Vec<NodeId>>,
    /// How many times the shortest path is scanned. Later passes show the cache at work.
    pub passes: u32,
}

impl RouteRequest {
    pub fn new(start: NodeId, goal: NodeId, metric: Metric) -> Self {
        RouteRequest {
            start,
            goal,
            metric,
            candidates: Vec::new(),
            passes: 1,
        }
    }
}

pub struct Harness {
    config: ExperimentConfig,
    graph: Datagraph,
    truth: Option<GroundTruth>,
    backend: SharedBackend,
}

struct Trial<'a> {
    id: u32,
    task: &'a TaskSpec,
    optimal: (Option<u32>, Option<f64>),
}

impl Harness {
    pub fn from_config(config: ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let (graph, truth) = load_world(&config.world)?;
        let backend = build_backend(&config.backend)?;
        Ok(Harness {
            config,
            graph,
            truth,
            backend,
        })
    }

    /// Uses an already loaded world and backend; `config.world` and `config.backend` are ignored.
    pub fn from_parts(
        config: ExperimentConfig,
        graph: Datagraph,
        truth: Option<GroundTruth>,
        backend: SharedBackend,
    ) -> Result<Self> {
        config.validate()?;
        Ok(Harness {
            config,
            graph,
            truth,
            backend,
        })
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.config
    }

    pub fn graph(&self) -> &Datagraph {
        &self.graph
    }

    pub fn truth(&self) -> Option<&GroundTruth> {
        self.truth.as_ref()
    }

    fn require_truth(&self) -> Result<&GroundTruth> {
        self.truth
            .as_ref()
            .ok_or_else(|| Error::Config("this command needs ground truth; none was loaded".into()))
    }

    pub fn tasks(&self) -> Result<Vec<TaskSpec>> {
        let truth = self.require_truth()?;
        let t = self.config.tasks;
        (0..t.count)
            .map(|i| Ok(make_task(t.kind, &self.graph, truth, task_seed(t.seed, i))?))
            .collect()
    }

    /// Runs every task under every selected strategy and writes the reports.
    pub fn compare(&self) -> Result<MetricsReport> {
        let report = self.compare_with(&*self.backend)?;
        self.write_compare(&report)?;
        Ok(report)
    }

    /// Like [`Harness::compare`] but records every backend answer for replay.
    pub fn record(&self) -> Result<(MetricsReport, ReplayStore)> {
        let recorder = RecordingBackend::new(&*self.backend);
        let report = self.compare_with(&recorder)?;
        self.write_compare(&report)?;
        Ok((report, recorder.into_store()))
    }

    pub fn compare_with(&self, backend: &(dyn Backend + Sync)) -> Result<MetricsReport> {
        let tasks = self.tasks()?;
        let truth = self.require_truth()?;
        let metric = self.config.metric;
        let mut trials = Vec::with_capacity(tasks.len());
        for (i, task) in tasks.iter().enumerate() {
            let p = &task.query.predicate;
            let by_hops = ground_truth_nearest(&self.graph, truth, task.agent_node, p, Metric::Hops)?;
            let by_meters = ground_truth_nearest(&self.graph, truth, task.agent_node, p, Metric::Meters)?;
            trials.push(Trial {
                id: i as u32,
                task,
                optimal: (by_hops.map(|h| h.hops), by_meters.map(|h| h.meters)),
            });
        }

        let strategies = self.config.strategy_set();
        let shared: Vec<(Strategy, CachedBackend<&(dyn Backend + Sync)>)> = if self.config.shared_cache {
            strategies.iter().map(|&s| (s, CachedBackend::new(backend))).collect()
        } else {
            Vec::new()
        };
        let jobs: Vec<(&Trial, Strategy)> = trials
            .iter()
            .flat_map(|t| strategies.iter().map(move |&s| (t, s)))
            .collect();

        let next = AtomicUsize::new(0);
        let records = Mutex::new(Vec::with_capacity(jobs.len()));
        let work = || loop {
            let j = next.fetch_add(1, Ordering::Relaxed);
            let Some(&(trial, strategy)) = jobs.get(j) else {
                break;
            };
            let cache = shared.iter().find(|(s, _)| *s == strategy).map(|(_, c)| c);
            let rec = self.run_trial(backend, cache, trial, strategy);
            records.lock().unwrap_or_else(|p| p.into_inner()).push(rec);
        };
        let workers = self.config.workers.min(jobs.len()).max(1);
        if workers == 1 {
            work();
        } else {
            std::thread::scope(|s| {
                for _ in 0..workers {
                    s.spawn(work);
                }
            });
        }
        let records = records.into_inner().unwrap_or_else(|p| p.into_inner());
        Ok(MetricsReport::from_trials(metric, records))
    }

    fn run_trial(
        &self,
        backend: &(dyn Backend + Sync),
        shared: Option<&CachedBackend<&(dyn Backend + Sync)>>,
        trial: &Trial,
        strategy: Strategy,
    ) -> TrialRecord {
        let fresh;
        let b: &dyn Backend = match (self.config.cache_enabled, shared) {
            (false, _) => backend,
            (true, Some(c)) => c,
            (true, None) => {
                fresh = CachedBackend::new(backend);
                &fresh
            }
        };
        let task = trial.task;
        let options = TraversalOptions {
            metric: self.config.metric,
            traversable_only: false,
        };
        let started = Instant::now();
        let outcome = match strategy {
            Strategy::Proximity => proximity_search_first(&self.graph, b, &task.query, task.agent_node, options),
            Strategy::BruteForce => brute_force_query(&self.graph, b, &task.query, true, Some(task.agent_node), false),
        };
        let wall_time_ms = started.elapsed().as_secs_f64() * 1000.0;
        let (result, error) = match outcome {
            Ok(r) => (r, None),
            Err(TraversalError::Backend { node, source, partial }) => {
                (*partial, Some(format!("backend failed at node {}: {source}", node.0)))
            }
            Err(e) => (TraversalResult::default(), Some(e.to_string())),
        };
        let hit = result.first_satisfied;
        let found = (hit.and_then(|h| h.hops), hit.and_then(|h| h.meters));
        let found_is_closest = error.is_none()
            && match (hit, trial.optimal.0) {
                (None, None) => true,
                (Some(_), Some(_)) => same_distance(self.config.metric, found, trial.optimal),
                _ => false,
            };
        TrialRecord {
            task_id: trial.id,
            strategy,
            task_kind: task.kind,
            agent_node: task.agent_node,
            found_node: hit.map(|h| h.node),
            backend_calls: result.total_backend_calls,
            hops_of_found: found.0,
            meters_of_found: found.1,
            optimal_hops: trial.optimal.0,
            optimal_meters: trial.optimal.1,
            found_is_closest,
            wall_time_ms,
            cache_hits: result.cache_hits() as u64,
            error,
        }
    }

    fn write_compare(&self, report: &MetricsReport) -> Result<()> {
        let Some(dir) = &self.config.output_dir else {
            return Ok(());
        };
        for format in &self.config.report_formats {
            match format {
                ReportFormat::Json => write_report(&dir.join("compare.json"), report)?,
                ReportFormat::Csv => {
                    let path = dir.join("compare.csv");
                    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
                    std::fs::write(&path, report.to_csv()?).map_err(|e| Error::io(&path, e))?;
                }
            }
        }
        Ok(())
    }

    /// Scans the shortest start-to-goal path for hazards and ranks any candidate routes.
    pub fn route_scan(&self, request: &RouteRequest) -> Result<(TraversalResult, RouteScanReport)> {
        let g = &self.graph;
        let path = shortest_path(g, request.start, request.goal, request.metric, false)?.ok_or_else(|| {
            Error::Route(format!("goal {} is unreachable from {}", request.goal.0, request.start.0))
        })?;
        let query = hazard_query();
        let cache = self.config.cache_enabled.then(|| CachedBackend::new(&*self.backend));
        let b: &dyn Backend = match &cache {
            Some(c) => c,
            None => &*self.backend,
        };

        let mut first = None;
        let mut passes = Vec::new();
        for pass in 0..request.passes.max(1) {
            let r = path_query(g, b, &query, &path)?;
            passes.push(PassStats {
                pass,
                backend_calls: r.total_backend_calls,
                cache_hits: r.cache_hits() as u64,
            });
            first.get_or_insert(r);
        }
        let result = first.expect("at least one pass runs");
        let verdicts: Vec<NodeVerdict> = result
            .responses
            .iter()
            .map(|r| NodeVerdict {
                node: r.node,
                satisfied: r.satisfied,
                text: r.text.clone(),
            })
            .collect();
        let hazard_nodes = hazards(&result);

        let mut candidates = Vec::new();
        for cand in &request.candidates {
            if cand.first() != Some(&request.start) || cand.last() != Some(&request.goal) {
                return Err(Error::Route(format!(
                    "candidate route {cand:?} does not run from {} to {}",
                    request.start.0, request.goal.0
                )));
            }
            let r = path_query(g, b, &query, cand)?;
            let length = |m| path_length(g, cand, m, false).expect("path_query validated adjacency");
            candidates.push(CandidateRoute {
                path: cand.clone(),
                hazard_nodes: hazards(&r),
                hops: length(Metric::Hops) as u32,
                meters: length(Metric::Meters),
            });
        }
        let selected = (0..candidates.len()).min_by(|&i, &j| {
            let (a, b) = (&candidates[i], &candidates[j]);
            let len = |c: &CandidateRoute| match request.metric {
                Metric::Hops => f64::from(c.hops),
                Metric::Meters => c.meters,
            };
            a.hazard_nodes
                .len()
                .cmp(&b.hazard_nodes.len())
                .then(len(a).total_cmp(&len(b)))
                .then_with(|| a.path.cmp(&b.path))
        });

        let report = RouteScanReport {
            start: request.start,
            goal: request.goal,
            metric: request.metric,
            accepted: hazard_nodes.is_empty(),
            path,
            verdicts,
            hazard_nodes,
            passes,
            candidates,
            selected,
        };
        if let Some(dir) = &self.config.output_dir {
            write_report(&dir.join("route.json"), &report)?;
        }
        Ok((result, report))
    }

    /// Counts objects matching `predicate` across the whole world.
    pub fn aggregate(&self, predicate: Predicate, dedup_radius_m: f64) -> Result<AggregateRunReport> {
        let what = predicate.label_equals.clone().unwrap_or_else(|| "matching objects".into());
        let query = Query::count(format!("How many {what} are there?"), predicate);
        let result = aggregate_count(&self.graph, &*self.backend, &query, dedup_radius_m)?;
        let true_count = self.truth.as_ref().map(|t| t.true_count(&query.predicate));
        let report = AggregateRunReport {
            query_text: query.text,
            dedup_radius_m,
            error: true_count.map(|t| result.deduped_total as i64 - t as i64),
            true_count,
            result,
        };
        if let Some(dir) = &self.config.output_dir {
            write_report(&dir.join("aggregate.json"), &report)?;
        }
        Ok(report)
    }
}

fn path_query(g: &Datagraph, b: &dyn Backend, q: &Query, path: &[NodeId]) -> Result<TraversalResult> {
    Ok(datagraph_core::traversal::path_query(g, b, q, path, false)?)
}

/// Distinct hazard-positive nodes in visit order.
fn hazards(r: &TraversalResult) -> Vec<NodeId> {
    let mut out: Vec<NodeId> = Vec::new();
    for n in r.satisfied_nodes() {
        if !out.contains(&n) {
            out.push(n);
        }
    }
    out
}
