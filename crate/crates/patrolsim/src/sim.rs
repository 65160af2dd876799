//! Discrete-time simulation of a patrol team on the graph. Produces traces
//! under one of three strategies: the nondeterministic RAND baseline plus
//! two deterministic stand-ins (greedy idleness chasing and a fixed cyclic
//! tour) that give adaptive-deterministic and rigid-deterministic behavior.

use crate::graph::{
    all_pairs_shortest_paths, shortest_path, DistanceMatrix, GraphPosition, PatrolGraph, VertexId,
};
use crate::trace::{PatrolTrace, TraceFrame};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Arrival snap tolerance, guarding float drift on fractional edge weights.
const ARRIVAL_EPS: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("agent count must be at least 1")]
    NoAgents,
    #[error("patrolling needs at least 2 vertices")]
    GraphTooSmall,
    #[error("agent count {agents} exceeds vertex count {n}")]
    TooManyAgents { agents: usize, n: usize },
    #[error("duration {duration} is not a positive multiple of dt {dt}")]
    BadDuration { duration: f64, dt: f64 },
    #[error("timestep dt must be positive, got {0}")]
    BadDt(f64),
    #[error("explicit placement has {got} vertices for {expected} agents")]
    PlacementLength { got: usize, expected: usize },
    #[error("placement vertex {0} is out of range")]
    PlacementVertex(VertexId),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StrategyKind {
    Rand,
    Greedy,
    Cyclic,
}

impl StrategyKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            StrategyKind::Rand => "rand",
            StrategyKind::Greedy => "greedy",
            StrategyKind::Cyclic => "cyclic",
        }
    }
}

impl std::str::FromStr for StrategyKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "rand" => Ok(StrategyKind::Rand),
            "greedy" => Ok(StrategyKind::Greedy),
            "cyclic" => Ok(StrategyKind::Cyclic),
            other => Err(format!(
                "unknown strategy '{other}' (expected rand, greedy, or cyclic)"
            )),
        }
    }
}

impl std::fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Initial agent placement: seeded-random distinct vertices, or an explicit
/// list. The cyclic strategy overrides both with evenly spaced tour offsets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Placement {
    #[default]
    Random,
    Explicit(Vec<VertexId>),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimConfig {
    pub strategy: StrategyKind,
    pub agents: usize,
    #[serde(default = "default_dt")]
    pub dt: f64,
    pub duration: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub placement: Placement,
}

fn default_dt() -> f64 {
    1.0
}

impl SimConfig {
    pub fn validate(&self, g: &PatrolGraph) -> Result<(), SimError> {
        if self.agents == 0 {
            return Err(SimError::NoAgents);
        }
        if g.vertex_count() < 2 {
            return Err(SimError::GraphTooSmall);
        }
        if self.agents > g.vertex_count() {
            return Err(SimError::TooManyAgents {
                agents: self.agents,
                n: g.vertex_count(),
            });
        }
        if !(self.dt > 0.0) {
            return Err(SimError::BadDt(self.dt));
        }
        let steps = self.duration / self.dt;
        if !(self.duration > 0.0) || (steps - steps.round()).abs() > 1e-6 {
            return Err(SimError::BadDuration {
                duration: self.duration,
                dt: self.dt,
            });
        }
        if let Placement::Explicit(vs) = &self.placement {
            if vs.len() != self.agents {
                return Err(SimError::PlacementLength {
                    got: vs.len(),
                    expected: self.agents,
                });
            }
            if let Some(&v) = vs.iter().find(|&&v| v >= g.vertex_count()) {
                return Err(SimError::PlacementVertex(v));
            }
        }
        Ok(())
    }
}

/// One patrol agent. The broadcast intention other agents observe is always
/// the current target.
#[derive(Debug, Clone)]
pub struct AgentState {
    pub id: usize,
    pub position: GraphPosition,
    pub target: VertexId,
}

impl AgentState {
    pub fn intention(&self) -> VertexId {
        self.target
    }
}

/// Mutable world: elapsed time, agents, and per-vertex idleness in seconds.
#[derive(Debug, Clone)]
pub struct WorldState {
    pub time: f64,
    pub agents: Vec<AgentState>,
    pub idleness: Vec<f64>,
}

/// A closed walk visiting every vertex at least once: nearest-neighbor stop
/// order from vertex 0 under the shortest-path metric, with consecutive
/// stops (and the final return to 0) connected by shortest paths. The first
/// and last walk entries are both vertex 0. Deterministic.
pub fn cyclic_tour(g: &PatrolGraph, dm: &DistanceMatrix) -> Vec<VertexId> {
    let n = g.vertex_count();
    let mut remaining: Vec<bool> = vec![true; n];
    remaining[0] = false;
    let mut stops = vec![0];
    let mut cur = 0;
    for _ in 1..n {
        let mut best: Option<VertexId> = None;
        for v in 0..n {
            if remaining[v] && best.is_none_or(|b| dm.get(cur, v) < dm.get(cur, b)) {
                best = Some(v);
            }
        }
        let next = best.expect("unvisited vertex remains");
        remaining[next] = false;
        stops.push(next);
        cur = next;
    }
    stops.push(0);

    let mut walk = vec![0];
    for pair in stops.windows(2) {
        let segment = shortest_path(g, pair[0], pair[1]);
        walk.extend_from_slice(&segment[1..]);
    }
    walk
}

/// RAND choice: uniform among neighbors not intended by any other agent,
/// falling back to all neighbors when every one is taken.
fn decide_rand(
    neighbors: &[(VertexId, f64)],
    other_intentions: &[VertexId],
    rng: &mut ChaCha8Rng,
) -> VertexId {
    let free: Vec<VertexId> = neighbors
        .iter()
        .map(|&(v, _)| v)
        .filter(|v| !other_intentions.contains(v))
        .collect();
    let pool: Vec<VertexId> = if free.is_empty() {
        neighbors.iter().map(|&(v, _)| v).collect()
    } else {
        free
    };
    pool[rng.random_range(0..pool.len())]
}

/// Greedy choice: the neighbor with maximal current idleness, ties broken
/// by lowest vertex id.
fn decide_greedy(neighbors: &[(VertexId, f64)], idleness: &[f64]) -> VertexId {
    let mut best = neighbors[0].0;
    for &(v, _) in &neighbors[1..] {
        if idleness[v] > idleness[best] {
            best = v;
        }
    }
    best
}

struct Simulation<'g> {
    graph: &'g PatrolGraph,
    cfg: SimConfig,
    rng: ChaCha8Rng,
    world: WorldState,
    // Idleness is derived from the frame of last visit so repeated float
    // addition cannot drift.
    last_visit_frame: Vec<u64>,
    frame: u64,
    // Cyclic strategy: the shared walk and each agent's cursor into it.
    tour: Vec<VertexId>,
    tour_cursors: Vec<usize>,
}

impl<'g> Simulation<'g> {
    fn new(graph: &'g PatrolGraph, dm: &DistanceMatrix, cfg: SimConfig) -> Result<Self, SimError> {
        cfg.validate(graph)?;
        let n = graph.vertex_count();
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

        let (tour, tour_cursors, starts) = if cfg.strategy == StrategyKind::Cyclic {
            let walk = cyclic_tour(graph, dm);
            let cycle_len = walk.len() - 1;
            let cursors: Vec<usize> = (0..cfg.agents)
                .map(|a| a * cycle_len / cfg.agents)
                .collect();
            let starts = cursors.iter().map(|&c| walk[c]).collect();
            (walk, cursors, starts)
        } else {
            let starts = match &cfg.placement {
                Placement::Explicit(vs) => vs.clone(),
                Placement::Random => {
                    let mut pool: Vec<VertexId> = (0..n).collect();
                    let mut chosen = Vec::with_capacity(cfg.agents);
                    for _ in 0..cfg.agents {
                        let i = rng.random_range(0..pool.len());
                        chosen.push(pool.swap_remove(i));
                    }
                    chosen
                }
            };
            (Vec::new(), Vec::new(), starts)
        };

        let mut sim = Self {
            graph,
            cfg,
            rng,
            world: WorldState {
                time: 0.0,
                agents: starts
                    .iter()
                    .enumerate()
                    .map(|(id, &v)| AgentState {
                        id,
                        position: GraphPosition::AtVertex(v),
                        target: v,
                    })
                    .collect(),
                idleness: vec![0.0; n],
            },
            last_visit_frame: vec![0; n],
            frame: 0,
            tour,
            tour_cursors,
        };
        for id in 0..sim.world.agents.len() {
            let target = sim.decide(id);
            sim.world.agents[id].target = target;
        }
        Ok(sim)
    }

    fn decide(&mut self, agent_id: usize) -> VertexId {
        match self.cfg.strategy {
            StrategyKind::Rand => {
                let at = match self.world.agents[agent_id].position {
                    GraphPosition::AtVertex(v) => v,
                    _ => unreachable!("decisions happen at vertices"),
                };
                let others: Vec<VertexId> = self
                    .world
                    .agents
                    .iter()
                    .filter(|a| a.id != agent_id)
                    .map(|a| a.intention())
                    .collect();
                decide_rand(self.graph.neighbors(at), &others, &mut self.rng)
            }
            StrategyKind::Greedy => {
                let at = match self.world.agents[agent_id].position {
                    GraphPosition::AtVertex(v) => v,
                    _ => unreachable!("decisions happen at vertices"),
                };
                decide_greedy(self.graph.neighbors(at), &self.world.idleness)
            }
            StrategyKind::Cyclic => {
                let cycle_len = self.tour.len() - 1;
                self.tour_cursors[agent_id] = (self.tour_cursors[agent_id] + 1) % cycle_len;
                self.tour[self.tour_cursors[agent_id]]
            }
        }
    }

    /// Advances one timestep: move every agent dt along its edge (snapping
    /// on arrival, with no overshoot carried), let arrivals pick new targets
    /// in agent-id order, then update idleness.
    fn step(&mut self) {
        self.frame += 1;
        let dt = self.cfg.dt;

        let mut arrived = Vec::new();
        for agent in &mut self.world.agents {
            let (from, to, traveled) = match agent.position {
                GraphPosition::AtVertex(v) if v == agent.target => continue,
                GraphPosition::AtVertex(v) => (v, agent.target, 0.0),
                GraphPosition::OnEdge { from, to, offset } => (from, to, offset),
            };
            let w = self
                .graph
                .edge_weight(from, to)
                .expect("agents travel on real edges");
            let remaining = w - traveled;
            if remaining <= dt + ARRIVAL_EPS {
                agent.position = GraphPosition::AtVertex(to);
                arrived.push(agent.id);
            } else {
                agent.position = GraphPosition::OnEdge {
                    from,
                    to,
                    offset: traveled + dt,
                };
            }
        }

        for id in arrived {
            let target = self.decide(id);
            self.world.agents[id].target = target;
        }

        self.world.time = self.frame as f64 * dt;
        for v in 0..self.world.idleness.len() {
            let occupied = self
                .world
                .agents
                .iter()
                .any(|a| a.position == GraphPosition::AtVertex(v));
            if occupied {
                self.last_visit_frame[v] = self.frame;
            }
            self.world.idleness[v] = (self.frame - self.last_visit_frame[v]) as f64 * dt;
        }
    }

    fn capture_frame(&self) -> TraceFrame {
        TraceFrame {
            t: self.world.time,
            positions: self.world.agents.iter().map(|a| a.position).collect(),
            idleness: self.world.idleness.clone(),
        }
    }
}

/// Runs a full simulation, producing `duration/dt + 1` frames inclusive of
/// t = 0. Deterministic given the seed.
pub fn run(graph: &PatrolGraph, cfg: &SimConfig) -> Result<PatrolTrace, SimError> {
    let dm = all_pairs_shortest_paths(graph);
    run_with_dm(graph, &dm, cfg)
}

/// As [`run`], reusing a precomputed distance matrix.
pub fn run_with_dm(
    graph: &PatrolGraph,
    dm: &DistanceMatrix,
    cfg: &SimConfig,
) -> Result<PatrolTrace, SimError> {
    let mut sim = Simulation::new(graph, dm, cfg.clone())?;
    let steps = (cfg.duration / cfg.dt).round() as u64;
    let mut frames = Vec::with_capacity(steps as usize + 1);
    frames.push(sim.capture_frame());
    for _ in 0..steps {
        sim.step();
        frames.push(sim.capture_frame());
    }
    Ok(PatrolTrace {
        graph_hash: graph.content_hash(),
        dt: cfg.dt,
        n_vertices: graph.vertex_count(),
        n_agents: cfg.agents,
        frames,
    })
}
