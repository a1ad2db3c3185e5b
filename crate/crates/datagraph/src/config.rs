//! Experiment configuration, loadable from a JSON file.
//!
//! ```json
//! { "world": { "spec": { "grid_w": 6, "grid_h": 6, ... } },
//!   "tasks": { "kind": "keyfob_match", "count": 50, "seed": 7 },
//!   "backend": "oracle",
//!   "strategies": ["proximity", "brute_force"],
//!   "output_dir": "out" }
//! ```
//!
//! `world` may instead be `{"files": {"graph": path, "ground_truth": path}}`.
//! `backend` may be `{"replay": {"path": ...}}` or `{"remote": {...}}`.

use std::path::{Path, PathBuf};

use datagraph_core::worldgen::{TaskKind, WorldSpec};
use datagraph_core::Metric;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formats::read_json_file;
use crate::remote::RemoteEndpointConfig;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WorldSource {
    Spec(WorldSpec),
    Files {
        graph: PathBuf,
        /// Needed to generate and score tasks; not needed for `route`.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        ground_truth: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskConfig {
    pub kind: TaskKind,
    pub count: u32,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackendConfig {
    Oracle,
    Replay { path: PathBuf },
    Remote(RemoteEndpointConfig),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Proximity,
    BruteForce,
}

impl Strategy {
    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::Proximity => "proximity",
            Strategy::BruteForce => "brute_force",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportFormat {
    Json,
    Csv,
}

fn default_backend() -> BackendConfig {
    BackendConfig::Oracle
}

fn default_strategies() -> Vec<Strategy> {
    vec![Strategy::Proximity, Strategy::BruteForce]
}

fn default_true() -> bool {
    true
}

fn default_formats() -> Vec<ReportFormat> {
    vec![ReportFormat::Json, ReportFormat::Csv]
}

fn default_workers() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub world: WorldSource,
    pub tasks: TaskConfig,
    #[serde(default = "default_backend")]
    pub backend: BackendConfig,
    #[serde(default = "default_strategies")]
    pub strategies: Vec<Strategy>,
    #[serde(default)]
    pub metric: Metric,
    #[serde(default = "default_true")]
    pub cache_enabled: bool,
    /// One cache per strategy for the whole run instead of one per trial.
    #[serde(default)]
    pub shared_cache: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default = "default_formats")]
    pub report_formats: Vec<ReportFormat>,
    /// Trials run on this many threads. Report order does not depend on it.
    #[serde(default = "default_workers")]
    pub workers: usize,
}

impl ExperimentConfig {
    pub fn new(world: WorldSource, tasks: TaskConfig) -> Self {
        ExperimentConfig {
            world,
            tasks,
            backend: default_backend(),
            strategies: default_strategies(),
            metric: Metric::Hops,
            cache_enabled: true,
            shared_cache: false,
            output_dir: None,
            report_formats: default_formats(),
            workers: 1,
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        read_json_file(path)
    }

    pub fn validate(&self) -> Result<()> {
        if self.strategies.is_empty() {
            return Err(Error::Config("at least one strategy is required".into()));
        }
        if self.tasks.count == 0 {
            return Err(Error::Config("at least one task is required".into()));
        }
        if self.workers == 0 {
            return Err(Error::Config("workers must be >= 1".into()));
        }
        if self.output_dir.is_some() && self.report_formats.is_empty() {
            return Err(Error::Config("output_dir is set but no report format is selected".into()));
        }
        match &self.world {
            WorldSource::Spec(spec) => spec.validate()?,
            WorldSource::Files { .. } => {}
        }
        if let BackendConfig::Remote(remote) = &self.backend {
            remote.validate()?;
        }
        Ok(())
    }

    /// Strategies in canonical order with duplicates removed.
    pub fn strategy_set(&self) -> Vec<Strategy> {
        let mut s = self.strategies.clone();
        s.sort();
        s.dedup();
        s
    }
}
