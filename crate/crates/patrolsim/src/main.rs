//! Command-line front end: simulate patrol traces, replay adversaries
//! against them, run parameter sweeps, and render report tables.

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use patrolsim::adversaries::{
    run_adversary, AdversaryKind, ProbabilisticConfig, ScenarioParams,
};
use patrolsim::graph::{all_pairs_shortest_paths, load_graph, PatrolGraph};
use patrolsim::harness::{
    aggregate, read_results_csv, run_sweep, write_results_csv, ExperimentSpec, GroupBy,
};
use patrolsim::maps;
use patrolsim::sim;
use patrolsim::sim::{Placement, SimConfig, StrategyKind};
use patrolsim::tcml::TcmlConfig;
use patrolsim::trace::{extract_window, parse_trace, write_trace};
use serde::Deserialize;
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "patrolsim",
    about = "Multi-robot patrol simulator and adversary red-team harness",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a patrol team and write the trace (JSON lines).
    Simulate(SimulateArgs),
    /// Replay one adversary against a recorded trace.
    Attack(AttackArgs),
    /// Run a full experiment sweep from a spec file.
    Sweep(SweepArgs),
    /// Aggregate a results CSV into a report table.
    Report(ReportArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// Built-in map name (grid5x4, corridor12, rings18) or graph JSON path.
    #[arg(long)]
    map: String,
    /// Patrol strategy: rand, greedy, or cyclic.
    #[arg(long)]
    strategy: StrategyKind,
    #[arg(long, default_value_t = 2)]
    agents: usize,
    /// Trace duration in seconds.
    #[arg(long)]
    duration: f64,
    /// Timestep in seconds.
    #[arg(long, default_value_t = 1.0)]
    dt: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Extra seconds simulated and discarded before the emitted trace, so
    /// it starts from settled patrol behavior.
    #[arg(long, default_value_t = 0.0)]
    warmup: f64,
    /// Comma-separated start vertices (default: seeded-random placement).
    #[arg(long)]
    placement: Option<String>,
    /// Output file (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct AttackArgs {
    /// Trace file produced by `simulate` (or ingested external data).
    #[arg(long)]
    trace: PathBuf,
    /// random, deterministic, full-knowledge, probabilistic, or tcml.
    #[arg(long)]
    adversary: AdversaryKind,
    /// Time horizon T in seconds.
    #[arg(long)]
    horizon: f64,
    /// Attack duration tau in seconds.
    #[arg(long)]
    tau: f64,
    /// Patrol graph; required for probabilistic and tcml, which compute
    /// distance features. Must match the trace's graph hash.
    #[arg(long)]
    map: Option<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// JSON file overriding adversary hyperparameters
    /// ({"tcml": {...}, "probabilistic": {...}}).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Feed the network raw idleness seconds instead of idleness/tau.
    #[arg(long)]
    no_feature_scaling: bool,
    /// Output file for the attack record (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// Experiment spec JSON file.
    #[arg(long)]
    config: PathBuf,
    /// Override the spec's base seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Results CSV path (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReportArgs {
    /// Results CSV produced by `sweep`.
    results: PathBuf,
    /// Grouping variable: map, strategy, n_agents, horizon, or tau.
    #[arg(long, value_name = "VAR")]
    group_by: String,
    /// Write the report as CSV here as well as printing the table.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default)]
struct AdversaryConfigFile {
    tcml: TcmlConfig,
    probabilistic: ProbabilisticConfig,
}

fn resolve_graph(entry: &str) -> Result<PatrolGraph> {
    if let Some(g) = maps::builtin(entry) {
        return Ok(g);
    }
    let text = std::fs::read_to_string(entry)
        .with_context(|| format!("reading map '{entry}'"))?;
    load_graph(&text).with_context(|| format!("loading map '{entry}'"))
}

fn emit(out: Option<&PathBuf>, content: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, content)
            .with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn cmd_simulate(args: SimulateArgs) -> Result<()> {
    let graph = resolve_graph(&args.map)?;
    let placement = match &args.placement {
        None => Placement::Random,
        Some(spec) => Placement::Explicit(
            spec.split(',')
                .map(|s| s.trim().parse::<usize>())
                .collect::<Result<Vec<_>, _>>()
                .context("parsing --placement (expected comma-separated vertex ids)")?,
        ),
    };
    let cfg = SimConfig {
        strategy: args.strategy,
        agents: args.agents,
        dt: args.dt,
        duration: args.duration + args.warmup,
        seed: args.seed,
        placement,
    };
    let mut trace = sim::run(&graph, &cfg)?;
    if args.warmup > 0.0 {
        trace = extract_window(&trace, args.warmup, args.duration)?;
    }
    emit(args.out.as_ref(), &write_trace(&trace))
}

fn cmd_attack(args: AttackArgs) -> Result<()> {
    let text = std::fs::read_to_string(&args.trace)
        .with_context(|| format!("reading trace {}", args.trace.display()))?;
    let trace = parse_trace(&text)?;
    let scenario = ScenarioParams::new(args.horizon, args.tau)?;

    let mut file_cfg = AdversaryConfigFile::default();
    if let Some(path) = &args.config {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        file_cfg = serde_json::from_str(&text)
            .with_context(|| format!("parsing config {}", path.display()))?;
    }
    if args.no_feature_scaling {
        file_cfg.tcml.feature_scaling = false;
    }

    let graph_dm = match &args.map {
        Some(entry) => {
            let graph = resolve_graph(entry)?;
            if graph.content_hash() != trace.graph_hash {
                bail!(
                    "map '{entry}' (hash {}) does not match the trace's graph hash {}",
                    graph.content_hash(),
                    trace.graph_hash
                );
            }
            let dm = all_pairs_shortest_paths(&graph);
            Some((graph, dm))
        }
        None => None,
    };

    let record = run_adversary(
        args.adversary,
        graph_dm.as_ref().map(|(g, dm)| (g, dm)),
        &trace,
        scenario,
        args.seed,
        &file_cfg.tcml,
        &file_cfg.probabilistic,
    )?;
    let mut line = serde_json::to_string(&record)?;
    line.push('\n');
    emit(args.out.as_ref(), &line)
}

fn cmd_sweep(args: SweepArgs) -> Result<()> {
    let text = std::fs::read_to_string(&args.config)
        .with_context(|| format!("reading spec {}", args.config.display()))?;
    let mut spec: ExperimentSpec = serde_json::from_str(&text)
        .with_context(|| format!("parsing spec {}", args.config.display()))?;
    if let Some(seed) = args.seed {
        spec.base_seed = seed;
    }
    let results = run_sweep(&spec)?;
    emit(args.out.as_ref(), &write_results_csv(&results.rows))
}

fn cmd_report(args: ReportArgs) -> Result<()> {
    let text = std::fs::read_to_string(&args.results)
        .with_context(|| format!("reading results {}", args.results.display()))?;
    let rows = read_results_csv(&text)?;
    let group_by: GroupBy = args
        .group_by
        .parse()
        .map_err(|e: String| anyhow::anyhow!(e))?;
    let table = aggregate(&rows, group_by)?;
    println!("{}", table.to_text());
    if let Some(path) = &args.out {
        std::fs::write(path, table.to_csv())
            .with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(args) => cmd_simulate(args),
        Command::Attack(args) => cmd_attack(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Report(args) => cmd_report(args),
    };
    if let Err(err) = result {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}
