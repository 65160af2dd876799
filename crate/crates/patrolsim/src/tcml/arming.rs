//! Arming rule: the adversary stays passive until the estimated probability
//! of it launching an attack (with time to complete) in the remaining
//! horizon drops below a threshold, and at least half the horizon has
//! elapsed. This trades off attacking too early on weak evidence against
//! running out of time.

use std::collections::VecDeque;

#[derive(Debug, Clone)]
pub struct ArmingState {
    outputs: VecDeque<Vec<f64>>,
    depth: usize,
    pub threshold: f64,
    pub armed: bool,
}

/// Probability that at least one of `steps` independent per-step prediction
/// events fires, given per-step probability `p_hat`.
pub fn launch_probability(p_hat: f64, steps: u64) -> f64 {
    1.0 - (1.0 - p_hat).powi(steps as i32)
}

impl ArmingState {
    pub fn new(depth: usize, threshold: f64) -> Self {
        Self {
            outputs: VecDeque::with_capacity(depth),
            depth,
            threshold,
            armed: false,
        }
    }

    /// Number of buffered output vectors.
    pub fn buffered(&self) -> usize {
        self.outputs.len()
    }

    /// Fraction of buffered outputs predicting at least one success.
    pub fn positive_fraction(&self) -> f64 {
        if self.outputs.is_empty() {
            return 0.0;
        }
        let hits = self
            .outputs
            .iter()
            .filter(|o| o.iter().any(|&p| p > 0.5))
            .count();
        hits as f64 / self.outputs.len() as f64
    }

    /// Pushes the latest per-vertex output vector and re-evaluates arming.
    /// Arming is monotone: once armed, always armed.
    pub fn update(
        &mut self,
        output: Vec<f64>,
        t_elapsed: f64,
        horizon: f64,
        tau: f64,
        dt: f64,
    ) {
        if self.outputs.len() == self.depth {
            self.outputs.pop_front();
        }
        self.outputs.push_back(output);
        if self.armed {
            return;
        }
        let p_hat = self.positive_fraction();
        let remaining = ((horizon - tau - t_elapsed) / dt).floor().max(0.0) as u64;
        let launch_p = launch_probability(p_hat, remaining);
        if t_elapsed >= horizon / 2.0 && launch_p < self.threshold {
            self.armed = true;
        }
    }
}
