//! Sweep execution: per-cell trace generation with content-addressed
//! caching, windowing, adversary evaluation, and tallying. Determinism is
//! keyed on per-run derived seeds, never on execution order.

use super::{ExperimentSpec, HarnessError, ResultRow};
use crate::adversaries::{run_adversary, AdversaryKind, ScenarioParams};
use crate::graph::{all_pairs_shortest_paths, load_graph, DistanceMatrix, PatrolGraph};
use crate::harness::stats::{wilson_interval, Z_95};
use crate::maps;
use crate::sim::{run_with_dm, Placement, SimConfig, StrategyKind};
use crate::trace::{extract_window, AttackOutcome, AttackRecord, PatrolTrace};
use rayon::prelude::*;
use sha2::{Digest, Sha256};
use std::collections::HashMap;

/// One adversary evaluation inside a sweep, kept for per-run analyses
/// (bootstrap intervals, arming audits) that the aggregated rows lose.
#[derive(Debug, Clone)]
pub struct RunRecord {
    pub map: String,
    pub strategy: StrategyKind,
    pub agents: usize,
    pub horizon: f64,
    pub tau: f64,
    pub adversary: AdversaryKind,
    pub run: usize,
    pub record: AttackRecord,
}

#[derive(Debug)]
pub struct SweepResults {
    pub rows: Vec<ResultRow>,
    pub records: Vec<RunRecord>,
}

/// Derives an independent seed from the base seed and a context path.
pub fn derive_seed(base: u64, parts: &[&str]) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(base.to_le_bytes());
    for part in parts {
        hasher.update([0xff]);
        hasher.update(part.as_bytes());
    }
    let digest = hasher.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("digest is long enough"))
}

pub(crate) struct MapContext {
    pub name: String,
    pub graph: PatrolGraph,
    pub dm: DistanceMatrix,
    pub hash: String,
}

/// Resolves a map entry: a built-in name first, else a graph file path.
pub(crate) fn resolve_map(entry: &str) -> Result<MapContext, HarnessError> {
    let graph = match maps::builtin(entry) {
        Some(g) => g,
        None => {
            let text =
                std::fs::read_to_string(entry).map_err(|source| HarnessError::Io {
                    path: entry.to_string(),
                    source,
                })?;
            load_graph(&text).map_err(|source| HarnessError::Map {
                name: entry.to_string(),
                source,
            })?
        }
    };
    let dm = all_pairs_shortest_paths(&graph);
    let hash = graph.content_hash();
    Ok(MapContext {
        name: entry.to_string(),
        graph,
        dm,
        hash,
    })
}

fn validate_spec(spec: &ExperimentSpec) -> Result<(), HarnessError> {
    let bad = |msg: String| Err(HarnessError::BadSpec(msg));
    if spec.maps.is_empty()
        || spec.strategies.is_empty()
        || spec.team_sizes.is_empty()
        || spec.horizons.is_empty()
        || spec.attack_durations.is_empty()
        || spec.adversaries.is_empty()
    {
        return bad("every list field needs at least one entry".into());
    }
    if spec.runs_per_cell == 0 {
        return bad("runs_per_cell must be at least 1".into());
    }
    if !(spec.dt > 0.0) {
        return bad(format!("dt must be positive, got {}", spec.dt));
    }
    if spec.warmup_seconds < 0.0 {
        return bad("warmup_seconds cannot be negative".into());
    }
    for &tau in &spec.attack_durations {
        for &horizon in &spec.horizons {
            if !(tau > 0.0 && tau < horizon) {
                return bad(format!(
                    "cell (T={horizon}, tau={tau}) violates 0 < tau < T"
                ));
            }
        }
    }
    Ok(())
}

fn float_key(x: f64) -> String {
    format!("{x}")
}

type TraceCache = HashMap<(String, StrategyKind, usize, u64, u64), PatrolTrace>;

fn base_trace(
    ctx: &MapContext,
    strategy: StrategyKind,
    agents: usize,
    duration: f64,
    dt: f64,
    seed: u64,
    cache: &mut TraceCache,
) -> Result<PatrolTrace, HarnessError> {
    let key = (
        ctx.hash.clone(),
        strategy,
        agents,
        duration.to_bits(),
        seed,
    );
    if let Some(hit) = cache.get(&key) {
        return Ok(hit.clone());
    }
    let cfg = SimConfig {
        strategy,
        agents,
        dt,
        duration,
        seed,
        placement: Placement::Random,
    };
    let trace = run_with_dm(&ctx.graph, &ctx.dm, &cfg)?;
    cache.insert(key, trace.clone());
    Ok(trace)
}

/// Runs the full sweep. Each patrol run is seeded from (base seed, graph
/// hash, strategy, agents, run index); each adversary evaluation from the
/// same plus (T, tau, adversary). Cells and runs evaluate in parallel with
/// per-run private state, then reduce in a fixed order.
pub fn run_sweep(spec: &ExperimentSpec) -> Result<SweepResults, HarnessError> {
    validate_spec(spec)?;
    let max_horizon = spec.horizons.iter().cloned().fold(0.0, f64::max);
    let max_tau = spec.attack_durations.iter().cloned().fold(0.0, f64::max);
    let duration = spec.warmup_seconds + max_horizon + max_tau;

    let mut rows = Vec::new();
    let mut records = Vec::new();

    for map_entry in &spec.maps {
        let ctx = resolve_map(map_entry)?;
        for &strategy in &spec.strategies {
            for &agents in &spec.team_sizes {
                if agents == 0 || agents > ctx.graph.vertex_count() {
                    return Err(HarnessError::BadSpec(format!(
                        "team size {agents} invalid for map '{}' ({} vertices)",
                        ctx.name,
                        ctx.graph.vertex_count()
                    )));
                }
                let mut cache = TraceCache::new();
                let traces: Vec<PatrolTrace> = (0..spec.runs_per_cell)
                    .map(|run| {
                        let seed = derive_seed(
                            spec.base_seed,
                            &[
                                "trace",
                                &ctx.hash,
                                strategy.as_str(),
                                &agents.to_string(),
                                &run.to_string(),
                            ],
                        );
                        base_trace(&ctx, strategy, agents, duration, spec.dt, seed, &mut cache)
                    })
                    .collect::<Result<_, _>>()?;

                for &horizon in &spec.horizons {
                    for &tau in &spec.attack_durations {
                        let scenario = ScenarioParams::new(horizon, tau)?;
                        // The window carries tau of lookahead beyond T so
                        // labels and outcomes near the end stay defined.
                        let windows: Vec<PatrolTrace> = traces
                            .iter()
                            .map(|t| {
                                extract_window(t, spec.warmup_seconds, horizon + tau)
                                    .map_err(HarnessError::from)
                            })
                            .collect::<Result<_, _>>()?;
                        for &adversary in &spec.adversaries {
                            let cell_records: Vec<AttackRecord> = windows
                                .par_iter()
                                .enumerate()
                                .map(|(run, window)| {
                                    let seed = derive_seed(
                                        spec.base_seed,
                                        &[
                                            "attack",
                                            &ctx.hash,
                                            strategy.as_str(),
                                            &agents.to_string(),
                                            &float_key(horizon),
                                            &float_key(tau),
                                            adversary.as_str(),
                                            &run.to_string(),
                                        ],
                                    );
                                    run_adversary(
                                        adversary,
                                        Some((&ctx.graph, &ctx.dm)),
                                        window,
                                        scenario,
                                        seed,
                                        &spec.tcml,
                                        &spec.probabilistic,
                                    )
                                })
                                .collect::<Result<_, _>>()?;

                            let mut successes = 0;
                            let mut failures = 0;
                            let mut not_launched = 0;
                            for rec in &cell_records {
                                match rec.outcome {
                                    AttackOutcome::Success => successes += 1,
                                    AttackOutcome::Failure => failures += 1,
                                    AttackOutcome::NotLaunched => not_launched += 1,
                                }
                            }
                            let runs = cell_records.len() as u64;
                            let p = successes as f64 / runs as f64;
                            let (ci_lo, ci_hi) = wilson_interval(successes, runs, Z_95);
                            rows.push(ResultRow {
                                map: ctx.name.clone(),
                                strategy,
                                agents,
                                horizon,
                                tau,
                                adversary,
                                runs,
                                successes,
                                failures,
                                not_launched,
                                p,
                                ci_lo,
                                ci_hi,
                            });
                            records.extend(cell_records.into_iter().enumerate().map(
                                |(run, record)| RunRecord {
                                    map: ctx.name.clone(),
                                    strategy,
                                    agents,
                                    horizon,
                                    tau,
                                    adversary,
                                    run,
                                    record,
                                },
                            ));
                        }
                    }
                }
            }
        }
    }
    Ok(SweepResults { rows, records })
}
