//! Adam optimizer over the flat parameter vector.

#[derive(Debug, Clone)]
pub struct AdamState {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub step: u64,
    m: Vec<f64>,
    v: Vec<f64>,
}

impl AdamState {
    pub fn new(param_count: usize, learning_rate: f64) -> Self {
        Self {
            learning_rate,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            step: 0,
            m: vec![0.0; param_count],
            v: vec![0.0; param_count],
        }
    }

    /// One bias-corrected Adam update, in place.
    pub fn apply(&mut self, params: &mut [f64], grads: &[f64]) {
        assert_eq!(params.len(), self.m.len());
        assert_eq!(grads.len(), self.m.len());
        self.step += 1;
        let bc1 = 1.0 - self.beta1.powi(self.step as i32);
        let bc2 = 1.0 - self.beta2.powi(self.step as i32);
        for i in 0..params.len() {
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * grads[i];
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * grads[i] * grads[i];
            let m_hat = self.m[i] / bc1;
            let v_hat = self.v[i] / bc2;
            params[i] -= self.learning_rate * m_hat / (v_hat.sqrt() + self.epsilon);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_leaves_params_unchanged() {
        let mut adam = AdamState::new(3, 0.001);
        let mut params = vec![0.5, -0.25, 1.0];
        let before = params.clone();
        adam.apply(&mut params, &[0.0, 0.0, 0.0]);
        assert_eq!(params, before);
    }

    #[test]
    fn first_step_magnitude_is_learning_rate() {
        // Closed form for step 1: update = -lr * g / (|g| + eps').
        for &g in &[0.3f64, -2.0, 17.5] {
            let mut adam = AdamState::new(1, 0.001);
            let mut params = vec![1.0];
            adam.apply(&mut params, &[g]);
            let expected = 1.0 - 0.001 * g / (g.abs() + 1e-8);
            assert!(
                (params[0] - expected).abs() < 1e-12,
                "g={g}: {} vs {expected}",
                params[0]
            );
            assert!((1.0 - params[0]).abs() - 0.001 <= 1e-9);
        }
    }

    #[test]
    fn deterministic_given_state() {
        let run = || {
            let mut adam = AdamState::new(2, 0.01);
            let mut params = vec![0.1, -0.2];
            for k in 0..20 {
                adam.apply(&mut params, &[0.05 * k as f64, -0.03]);
            }
            params
        };
        assert_eq!(run(), run());
    }
}
