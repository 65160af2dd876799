//! Observation buffer with delayed labeling. Feature frames are logged as
//! they arrive; once `tau` seconds have passed since a frame, every vertex
//! in it is labeled by whether an attack launched there at that instant
//! would have succeeded.

use super::features::FeatureFrame;
use crate::graph::VertexId;
use crate::trace::{attack_outcome, AttackOutcome, PatrolTrace};

#[derive(Debug, Clone, Default)]
pub struct ObservationBuffer {
    features: Vec<FeatureFrame>,
    times: Vec<f64>,
    labels: Vec<Option<Vec<bool>>>,
    labeled: usize,
}

impl ObservationBuffer {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, features: FeatureFrame, t: f64) {
        self.features.push(features);
        self.times.push(t);
        self.labels.push(None);
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn features(&self) -> &[FeatureFrame] {
        &self.features
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn labels(&self) -> &[Option<Vec<bool>>] {
        &self.labels
    }

    /// Number of frames with labels (always a prefix).
    pub fn labeled_count(&self) -> usize {
        self.labeled
    }

    /// Number of fully labeled windows of length `t_obs`.
    pub fn labeled_window_count(&self, t_obs: usize) -> usize {
        (self.labeled + 1).saturating_sub(t_obs)
    }

    pub fn window(&self, start: usize, t_obs: usize) -> &[FeatureFrame] {
        &self.features[start..start + t_obs]
    }

    pub fn window_labels(&self, start: usize, t_obs: usize) -> &[bool] {
        self.labels[start + t_obs - 1]
            .as_deref()
            .expect("window extends past labeling frontier")
    }

    /// Labels every frame observed at least `tau` seconds ago against the
    /// trace seen so far, returning the newly labeled entries.
    pub fn advance_labels(
        &mut self,
        t_elapsed: f64,
        tau: f64,
        seen: &PatrolTrace,
    ) -> Vec<(usize, VertexId, bool)> {
        let frontier = t_elapsed - tau;
        let mut fresh = Vec::new();
        while self.labeled < self.times.len() {
            let t = self.times[self.labeled];
            if t > frontier + 1e-9 {
                break;
            }
            let n = self.features[self.labeled].vertex_count();
            let mut row = Vec::with_capacity(n);
            for v in 0..n {
                let label = attack_outcome(seen, v, t, tau)
                    .expect("labeled frame lies tau inside the seen trace")
                    == AttackOutcome::Success;
                row.push(label);
                fresh.push((self.labeled, v, label));
            }
            self.labels[self.labeled] = Some(row);
            self.labeled += 1;
        }
        fresh
    }
}
