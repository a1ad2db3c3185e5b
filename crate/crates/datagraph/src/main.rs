use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use datagraph::config::{BackendConfig, ExperimentConfig, ReportFormat, Strategy, TaskConfig, WorldSource};
use datagraph::formats::{lint_graph_file, load_world_spec_file, save_replay_store_file};
use datagraph::harness::{write_world, Harness, RouteRequest};
use datagraph::remote::RemoteEndpointConfig;
use datagraph::{Error, MetricsReport, Result};
use datagraph_core::graph::NodeId;
use datagraph_core::query::Predicate;
use datagraph_core::worldgen::{TaskKind, WorldSpec};
use datagraph_core::Metric;

#[derive(Parser)]
#[command(name = "datagraph", version, about = "Spatial datagraph experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic world and write graph.json and ground_truth.json
    Gen(GenArgs),
    /// Compare proximity search with the brute-force baseline
    Compare(RunArgs),
    /// Scan the shortest route between two nodes for hazards
    Route(RouteArgs),
    /// Count objects across all nodes, merging boundary duplicates
    Aggregate(AggregateArgs),
    /// Lint a graph file
    Validate { graph: PathBuf },
    /// Run `compare` and save every backend answer to a replay store
    ReplayRecord(ReplayArgs),
    /// Run `compare` answering only from a replay store
    ReplayRun(ReplayArgs),
}

#[derive(Args)]
struct GenArgs {
    /// World spec JSON; the grid flags below are ignored when given
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long, default_value_t = 6)]
    width: u32,
    #[arg(long, default_value_t = 6)]
    height: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    duplicate_prob: Option<f64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum BackendKind {
    Oracle,
    Replay,
    Remote,
}

#[derive(Clone, Copy, ValueEnum)]
enum MetricArg {
    Hops,
    Meters,
}

impl From<MetricArg> for Metric {
    fn from(m: MetricArg) -> Self {
        match m {
            MetricArg::Hops => Metric::Hops,
            MetricArg::Meters => Metric::Meters,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum TaskArg {
    NearestSearch,
    RouteHazard,
    KeyfobMatch,
}

impl From<TaskArg> for TaskKind {
    fn from(t: TaskArg) -> Self {
        match t {
            TaskArg::NearestSearch => TaskKind::NearestSearch,
            TaskArg::RouteHazard => TaskKind::RouteHazard,
            TaskArg::KeyfobMatch => TaskKind::KeyfobMatch,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    Proximity,
    BruteForce,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

/// Flags mirroring the experiment config. Any flag given overrides the file.
#[derive(Args)]
struct CommonArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Generate the world from this spec file
    #[arg(long, conflicts_with = "graph")]
    world_spec: Option<PathBuf>,
    /// Load a saved world
    #[arg(long)]
    graph: Option<PathBuf>,
    #[arg(long, requires = "graph")]
    ground_truth: Option<PathBuf>,
    #[arg(long, value_enum)]
    backend: Option<BackendKind>,
    #[arg(long)]
    replay_store: Option<PathBuf>,
    #[arg(long)]
    remote_url: Option<String>,
    #[arg(long)]
    timeout_ms: Option<u64>,
    #[arg(long)]
    max_in_flight: Option<usize>,
    #[arg(long, env = "DATAGRAPH_AUTH_TOKEN", hide_env_values = true)]
    auth_token: Option<String>,
    /// Send node annotations to the remote endpoint as hints
    #[arg(long)]
    forward_annotations: bool,
    #[arg(long, value_enum)]
    metric: Option<MetricArg>,
    #[arg(long)]
    no_cache: bool,
    #[arg(long)]
    shared_cache: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long = "format", value_enum)]
    formats: Vec<FormatArg>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long, value_enum)]
    task: Option<TaskArg>,
    #[arg(long)]
    tasks: Option<u32>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long = "strategy", value_enum)]
    strategies: Vec<StrategyArg>,
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args)]
struct RouteArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long)]
    start: u32,
    #[arg(long)]
    goal: u32,
    /// Comma-separated node ids; repeat for several candidates
    #[arg(long = "candidate")]
    candidates: Vec<String>,
    #[arg(long, default_value_t = 1)]
    passes: u32,
}

#[derive(Args)]
struct AggregateArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long)]
    label: Option<String>,
    /// key=value, repeatable
    #[arg(long = "attr")]
    attributes: Vec<String>,
    #[arg(long, default_value_t = 0.5)]
    radius: f64,
}

#[derive(Args)]
struct ReplayArgs {
    #[command(flatten)]
    run: RunArgs,
    #[arg(long)]
    store: PathBuf,
}

fn placeholder_tasks() -> TaskConfig {
    TaskConfig {
        kind: TaskKind::NearestSearch,
        count: 1,
        seed: 0,
    }
}

fn base_config(common: &CommonArgs) -> Result<ExperimentConfig> {
    let mut config = match &common.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => {
            let world = world_from_flags(common)?
                .ok_or_else(|| Error::Config("no world given: use --config, --world-spec or --graph".into()))?;
            ExperimentConfig::new(world, placeholder_tasks())
        }
    };
    if let Some(world) = world_from_flags(common)? {
        config.world = world;
    }
    apply_backend(common, &mut config)?;
    if let Some(m) = common.metric {
        config.metric = m.into();
    }
    if common.no_cache {
        config.cache_enabled = false;
    }
    if common.shared_cache {
        config.shared_cache = true;
    }
    if let Some(out) = &common.out {
        config.output_dir = Some(out.clone());
    }
    if !common.formats.is_empty() {
        config.report_formats = common
            .formats
            .iter()
            .map(|f| match f {
                FormatArg::Json => ReportFormat::Json,
                FormatArg::Csv => ReportFormat::Csv,
            })
            .collect();
    }
    Ok(config)
}

fn world_from_flags(common: &CommonArgs) -> Result<Option<WorldSource>> {
    if let Some(spec) = &common.world_spec {
        return Ok(Some(WorldSource::Spec(load_world_spec_file(spec)?)));
    }
    Ok(common.graph.as_ref().map(|graph| WorldSource::Files {
        graph: graph.clone(),
        ground_truth: common.ground_truth.clone(),
    }))
}

fn apply_backend(common: &CommonArgs, config: &mut ExperimentConfig) -> Result<()> {
    match common.backend {
        Some(BackendKind::Oracle) => config.backend = BackendConfig::Oracle,
        Some(BackendKind::Replay) => {
            let path = common
                .replay_store
                .clone()
                .ok_or_else(|| Error::Config("--backend replay needs --replay-store".into()))?;
            config.backend = BackendConfig::Replay { path };
        }
        Some(BackendKind::Remote) => {
            let url = common
                .remote_url
                .clone()
                .ok_or_else(|| Error::Config("--backend remote needs --remote-url".into()))?;
            config.backend = BackendConfig::Remote(RemoteEndpointConfig::new(url));
        }
        None => {}
    }
    if let BackendConfig::Remote(remote) = &mut config.backend {
        if let Some(url) = &common.remote_url {
            remote.base_url = url.clone();
        }
        if let Some(t) = common.timeout_ms {
            remote.timeout_ms = t;
        }
        if let Some(n) = common.max_in_flight {
            remote.max_in_flight = n;
        }
        if common.auth_token.is_some() {
            remote.auth_token = common.auth_token.clone();
        }
        if common.forward_annotations {
            remote.forward_annotations = true;
        }
    }
    Ok(())
}

fn run_config(args: &RunArgs) -> Result<ExperimentConfig> {
    let mut config = base_config(&args.common)?;
    if let Some(t) = args.task {
        config.tasks.kind = t.into();
    }
    if let Some(n) = args.tasks {
        config.tasks.count = n;
    }
    if let Some(s) = args.seed {
        config.tasks.seed = s;
    }
    if !args.strategies.is_empty() {
        config.strategies = args
            .strategies
            .iter()
            .map(|s| match s {
                StrategyArg::Proximity => Strategy::Proximity,
                StrategyArg::BruteForce => Strategy::BruteForce,
            })
            .collect();
    }
    if let Some(w) = args.workers {
        config.workers = w;
    }
    Ok(config)
}

fn print_summary(report: &MetricsReport) {
    println!("strategy      trials  errored  mean_calls  median_calls  closest_rate");
    for (s, sum) in &report.summary {
        println!(
            "{:<13} {:>6}  {:>7}  {:>10.2}  {:>12.1}  {:>12.3}",
            s.as_str(),
            sum.trials,
            sum.errored,
            sum.mean_backend_calls,
            sum.median_backend_calls,
            sum.closest_rate
        );
    }
}

fn trial_exit(report: &MetricsReport) -> ExitCode {
    if report.has_errors() {
        eprintln!("some trials failed; see the error column of the report");
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    }
}

fn print_json<T: serde::Serialize>(value: &T) {
    use std::io::Write as _;
    let text = serde_json::to_string_pretty(value).expect("reports serialize infallibly");
    // A closed pipe (e.g. piping into `head`) is not an error worth a panic.
    let _ = writeln!(std::io::stdout(), "{text}");
}

fn parse_path(text: &str) -> Result<Vec<NodeId>> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<u32>()
                .map(NodeId)
                .map_err(|_| Error::Config(format!("bad node id {s:?} in route {text:?}")))
        })
        .collect()
}

fn gen(args: &GenArgs) -> Result<ExitCode> {
    let spec = match &args.spec {
        Some(path) => load_world_spec_file(path)?,
        None => {
            let mut spec = WorldSpec::new(args.width, args.height, args.seed);
            if let Some(p) = args.duplicate_prob {
                spec.boundary_duplicate_prob = p;
            }
            spec
        }
    };
    let (graph, truth) = write_world(&spec, &args.out)?;
    println!("wrote {} and {}", graph.display(), truth.display());
    Ok(ExitCode::SUCCESS)
}

fn validate(path: &Path) -> Result<ExitCode> {
    let violations = lint_graph_file(path)?;
    if violations.is_empty() {
        println!("{}: ok", path.display());
        return Ok(ExitCode::SUCCESS);
    }
    for v in &violations {
        println!("{}: {v}", path.display());
    }
    Ok(ExitCode::from(1))
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Gen(args) => gen(&args),
        Command::Validate { graph } => validate(&graph),
        Command::Compare(args) => {
            let report = Harness::from_config(run_config(&args)?)?.compare()?;
            print_summary(&report);
            Ok(trial_exit(&report))
        }
        Command::ReplayRecord(args) => {
            let (report, store) = Harness::from_config(run_config(&args.run)?)?.record()?;
            save_replay_store_file(&store, &args.store)?;
            print_summary(&report);
            println!("recorded {} responses to {}", store.len(), args.store.display());
            Ok(trial_exit(&report))
        }
        Command::ReplayRun(args) => {
            let mut config = run_config(&args.run)?;
            config.backend = BackendConfig::Replay { path: args.store };
            let report = Harness::from_config(config)?.compare()?;
            print_summary(&report);
            Ok(trial_exit(&report))
        }
        Command::Route(args) => {
            let config = base_config(&args.common)?;
            let mut request = RouteRequest::new(NodeId(args.start), NodeId(args.goal), config.metric);
            request.passes = args.passes;
            request.candidates = args.candidates.iter().map(|c| parse_path(c)).collect::<Result<_>>()?;
            let (_, report) = Harness::from_config(config)?.route_scan(&request)?;
            print_json(&report);
            Ok(ExitCode::SUCCESS)
        }
        Command::Aggregate(args) => {
            let config = base_config(&args.common)?;
            let mut predicate = Predicate {
                label_equals: args.label.clone(),
                attribute_equals: Vec::new(),
            };
            for kv in &args.attributes {
                let (k, v) = kv
                    .split_once('=')
                    .ok_or_else(|| Error::Config(format!("--attr expects key=value, got {kv:?}")))?;
                predicate = predicate.and_attribute(k, v);
            }
            let report = Harness::from_config(config)?.aggregate(predicate, args.radius)?;
            print_json(&report);
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
