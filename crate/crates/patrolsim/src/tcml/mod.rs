//! The time-constrained machine-learning adversary: a per-scenario network
//! trained online from scratch on delayed-labeled observations of the
//! patrol, plus the arming rule deciding when to start attacking.

mod adam;
mod arming;
mod buffer;
mod features;
mod network;

pub use adam::AdamState;
pub use arming::{launch_probability, ArmingState};
pub use buffer::ObservationBuffer;
pub use features::{FeatureExtractor, FeatureFrame};
pub use network::{NetworkParams, NetworkShape};

use crate::adversaries::{AdversaryDecision, ScenarioParams};
use crate::graph::{DistanceMatrix, PatrolGraph};
use crate::trace::{attack_outcome, AttackRecord, PatrolTrace, TraceFrame};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Hyperparameters. Defaults follow the tuned values: Adam at 0.001, leaky
/// ReLU slope 0.3, minibatch 4, hidden size 6, D2 l1 lambda 0.1.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct TcmlConfig {
    pub learning_rate: f64,
    pub minibatch_size: usize,
    pub hidden_size: usize,
    pub relu_slope: f64,
    pub l1_lambda: f64,
    /// Observation window length, in frames.
    pub t_obs: usize,
    /// Output buffer depth used by the arming estimate.
    pub output_buffer_depth: usize,
    pub arming_threshold: f64,
    /// Scale the idleness input by 1/tau. Disable to feed raw seconds.
    pub feature_scaling: bool,
}

impl Default for TcmlConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.001,
            minibatch_size: 4,
            hidden_size: 6,
            relu_slope: 0.3,
            l1_lambda: 0.1,
            t_obs: 10,
            output_buffer_depth: 100,
            arming_threshold: 0.999,
            feature_scaling: true,
        }
    }
}

/// Per-scenario adversary state. Strictly sequential: frames must arrive in
/// order, and online training makes the state order-dependent.
pub struct TcmlAdversary<'g> {
    graph: &'g PatrolGraph,
    dm: &'g DistanceMatrix,
    scenario: ScenarioParams,
    cfg: TcmlConfig,
    extractor: FeatureExtractor,
    pub net: NetworkParams,
    adam: AdamState,
    pub buffer: ObservationBuffer,
    pub arming: ArmingState,
    rng: ChaCha8Rng,
    /// Frames observed so far, retained for delayed labeling.
    seen: PatrolTrace,
    start_time: f64,
    attacked: bool,
}

impl<'g> TcmlAdversary<'g> {
    pub fn new(
        graph: &'g PatrolGraph,
        dm: &'g DistanceMatrix,
        scenario: ScenarioParams,
        cfg: TcmlConfig,
        dt: f64,
        graph_hash: String,
        seed: u64,
    ) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let shape = NetworkShape {
            n: graph.vertex_count(),
            t_obs: cfg.t_obs,
            hidden: cfg.hidden_size,
        };
        let net = NetworkParams::init(shape, cfg.relu_slope, cfg.l1_lambda, &mut rng);
        let adam = AdamState::new(shape.param_count(), cfg.learning_rate);
        let arming = ArmingState::new(cfg.output_buffer_depth, cfg.arming_threshold);
        let extractor = FeatureExtractor {
            dt,
            tau: scenario.tau,
            scale_idleness: cfg.feature_scaling,
        };
        Self {
            graph,
            dm,
            scenario,
            cfg,
            extractor,
            net,
            adam,
            buffer: ObservationBuffer::new(),
            arming,
            rng,
            seen: PatrolTrace {
                graph_hash,
                dt,
                n_vertices: graph.vertex_count(),
                n_agents: 0,
                frames: Vec::new(),
            },
            start_time: 0.0,
            attacked: false,
        }
    }

    pub fn seen_frames(&self) -> &PatrolTrace {
        &self.seen
    }

    /// Feeds one frame: log features, advance delayed labels, take one
    /// training step when a minibatch of labeled windows exists, refresh the
    /// arming estimate from the newest window, and decide.
    pub fn step(&mut self, frame: &TraceFrame) -> AdversaryDecision {
        self.step_with_prediction(frame, |net, window| net.forward(window))
    }

    /// As [`step`](Self::step), with the prediction function injectable so
    /// the decision path can be exercised with a stubbed network.
    pub fn step_with_prediction(
        &mut self,
        frame: &TraceFrame,
        predict: impl Fn(&NetworkParams, &[FeatureFrame]) -> Vec<f64>,
    ) -> AdversaryDecision {
        assert!(!self.attacked, "scenario already ended");
        if self.seen.frames.is_empty() {
            self.start_time = frame.t;
            self.seen.n_agents = frame.positions.len();
        }
        let t_elapsed = frame.t - self.start_time;
        let features = self
            .extractor
            .compute(self.graph, self.dm, frame, self.seen.frames.last());
        self.seen.frames.push(frame.clone());
        self.buffer.push(features, frame.t);
        self.buffer
            .advance_labels(frame.t, self.scenario.tau, &self.seen);

        let t_obs = self.cfg.t_obs;
        let windows = self.buffer.labeled_window_count(t_obs);
        if windows >= self.cfg.minibatch_size {
            let batch: Vec<(&[FeatureFrame], &[bool])> = (0..self.cfg.minibatch_size)
                .map(|_| {
                    let start = self.rng.random_range(0..windows);
                    (
                        self.buffer.window(start, t_obs),
                        self.buffer.window_labels(start, t_obs),
                    )
                })
                .collect();
            let (_, grads) = self.net.loss_and_gradients(&batch);
            self.adam.apply(&mut self.net.values, &grads);
        }

        let mut prediction = None;
        if self.buffer.len() >= t_obs {
            let latest = self.buffer.window(self.buffer.len() - t_obs, t_obs);
            let output = predict(&self.net, latest);
            self.arming.update(
                output.clone(),
                t_elapsed,
                self.scenario.horizon,
                self.scenario.tau,
                self.extractor.dt,
            );
            prediction = Some(output);
        }

        if self.arming.armed && t_elapsed <= self.scenario.max_launch_time() + 1e-9 {
            if let Some(pred) = prediction {
                let (best, best_p) = pred
                    .iter()
                    .enumerate()
                    .fold((0, f64::NEG_INFINITY), |(bi, bp), (i, &p)| {
                        if p > bp {
                            (i, p)
                        } else {
                            (bi, bp)
                        }
                    });
                if best_p > 0.5 {
                    self.attacked = true;
                    return AdversaryDecision::Attack(best);
                }
            }
        }
        AdversaryDecision::Wait
    }
}

/// Streams a recorded trace into a fresh TCML adversary and scores the
/// resulting attack (if any) against the trace. Frames past the horizon are
/// never shown to the adversary; they only serve outcome evaluation.
pub fn tcml_adversary(
    graph: &PatrolGraph,
    dm: &DistanceMatrix,
    trace: &PatrolTrace,
    scenario: ScenarioParams,
    cfg: TcmlConfig,
    seed: u64,
) -> AttackRecord {
    let mut adversary = TcmlAdversary::new(
        graph,
        dm,
        scenario,
        cfg,
        trace.dt,
        trace.graph_hash.clone(),
        seed,
    );
    let t0 = trace.start_time();
    for frame in &trace.frames {
        if frame.t - t0 > scenario.horizon + 1e-9 {
            break;
        }
        if let AdversaryDecision::Attack(v) = adversary.step(frame) {
            let outcome = attack_outcome(trace, v, frame.t, scenario.tau)
                .expect("attack launched within the covered horizon");
            return AttackRecord::launched(v, frame.t, outcome);
        }
    }
    AttackRecord::not_launched()
}
