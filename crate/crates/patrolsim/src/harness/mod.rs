//! Experiment orchestration: sweep adversaries over scenario grids, tally
//! success probabilities with confidence intervals, and emit report tables.

mod report;
pub mod stats;
mod sweep;

pub use report::{aggregate, read_results_csv, write_results_csv, GroupBy, ReportTable};
pub use sweep::{run_sweep, RunRecord, SweepResults};

use crate::adversaries::{AdversaryError, AdversaryKind, ProbabilisticConfig};
use crate::graph::GraphError;
use crate::sim::{SimError, StrategyKind};
use crate::tcml::TcmlConfig;
use crate::trace::TraceError;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("experiment spec: {0}")]
    BadSpec(String),
    #[error("map '{name}': {source}")]
    Map {
        name: String,
        #[source]
        source: GraphError,
    },
    #[error("reading '{path}': {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Trace(#[from] TraceError),
    #[error(transparent)]
    Adversary(#[from] AdversaryError),
    #[error("results CSV: {0}")]
    Csv(String),
}

/// A full experiment: the cross product of maps, strategies, team sizes,
/// horizons, and attack durations, each cell evaluated by every listed
/// adversary over `runs_per_cell` independently seeded patrol runs.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentSpec {
    /// Built-in map names or paths to graph JSON files.
    pub maps: Vec<String>,
    pub strategies: Vec<StrategyKind>,
    pub team_sizes: Vec<usize>,
    /// Time horizons T, seconds.
    pub horizons: Vec<f64>,
    /// Attack durations tau, seconds.
    pub attack_durations: Vec<f64>,
    pub adversaries: Vec<AdversaryKind>,
    pub runs_per_cell: usize,
    /// Trace prefix discarded before windowing, avoiding startup transients.
    pub warmup_seconds: f64,
    pub base_seed: u64,
    pub dt: f64,
    pub tcml: TcmlConfig,
    pub probabilistic: ProbabilisticConfig,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        Self {
            maps: vec!["grid5x4".into()],
            strategies: vec![StrategyKind::Rand],
            team_sizes: vec![2],
            horizons: vec![300.0, 1200.0, 3600.0],
            attack_durations: vec![30.0, 90.0, 180.0],
            adversaries: AdversaryKind::ALL.to_vec(),
            runs_per_cell: 50,
            warmup_seconds: 600.0,
            base_seed: 0,
            dt: 1.0,
            tcml: TcmlConfig::default(),
            probabilistic: ProbabilisticConfig::default(),
        }
    }
}

/// One sweep cell × adversary: outcome counts and the derived success
/// probability with its Wilson 95% interval. Not-launched scenarios count
/// as failures in `p` but are reported separately.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub map: String,
    pub strategy: StrategyKind,
    pub agents: usize,
    pub horizon: f64,
    pub tau: f64,
    pub adversary: AdversaryKind,
    pub runs: u64,
    pub successes: u64,
    pub failures: u64,
    pub not_launched: u64,
    pub p: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}
