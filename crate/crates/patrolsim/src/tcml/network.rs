//! The attack-prediction network and its hand-derived gradients.
//!
//! Data flow per window of `t_obs` feature frames: each per-vertex,
//! per-timestep `(d, v, i)` triple goes through a two-layer dense block D0
//! (3 -> hidden -> 1, leaky ReLU on both layers); each vertex's `t_obs` D0
//! outputs go through a dense layer D1 (t_obs -> 1, leaky ReLU); the `n`
//! resulting scalars go through a dense layer D2 (n -> n) with sigmoid,
//! yielding one attack-success prediction per vertex. D2 weights carry l1
//! regularization scaled by lambda over the weight count.
//!
//! Parameters live in one flat vector so the optimizer and the
//! finite-difference checks can treat them uniformly.

use super::features::FeatureFrame;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Sigmoid outputs are clamped away from {0, 1} before the log loss.
const BCE_EPS: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NetworkShape {
    pub n: usize,
    pub t_obs: usize,
    pub hidden: usize,
}

impl NetworkShape {
    fn d0_w1(&self) -> std::ops::Range<usize> {
        0..self.hidden * 3
    }
    fn d0_b1(&self) -> std::ops::Range<usize> {
        let s = self.hidden * 3;
        s..s + self.hidden
    }
    fn d0_w2(&self) -> std::ops::Range<usize> {
        let s = self.hidden * 4;
        s..s + self.hidden
    }
    fn d0_b2(&self) -> usize {
        self.hidden * 5
    }
    fn d1_w(&self) -> std::ops::Range<usize> {
        let s = self.hidden * 5 + 1;
        s..s + self.t_obs
    }
    fn d1_b(&self) -> usize {
        self.hidden * 5 + 1 + self.t_obs
    }
    fn d2_w(&self) -> std::ops::Range<usize> {
        let s = self.hidden * 5 + 2 + self.t_obs;
        s..s + self.n * self.n
    }
    fn d2_b(&self) -> std::ops::Range<usize> {
        let s = self.hidden * 5 + 2 + self.t_obs + self.n * self.n;
        s..s + self.n
    }

    pub fn param_count(&self) -> usize {
        self.hidden * 5 + 2 + self.t_obs + self.n * self.n + self.n
    }
}

#[derive(Debug, Clone)]
pub struct NetworkParams {
    pub shape: NetworkShape,
    pub leaky_slope: f64,
    /// D2 l1 hyperparameter; the applied factor is `l1_lambda / n^2`.
    pub l1_lambda: f64,
    pub values: Vec<f64>,
}

fn leaky(x: f64, slope: f64) -> f64 {
    if x >= 0.0 {
        x
    } else {
        slope * x
    }
}

fn leaky_grad(x: f64, slope: f64) -> f64 {
    if x >= 0.0 {
        1.0
    } else {
        slope
    }
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

impl NetworkParams {
    /// Random initialization: weights uniform in ±sqrt(6/(fan_in+fan_out))
    /// per layer, biases zero.
    pub fn init(shape: NetworkShape, leaky_slope: f64, l1_lambda: f64, rng: &mut ChaCha8Rng) -> Self {
        let mut values = vec![0.0; shape.param_count()];
        let fill = |range: std::ops::Range<usize>, fan_in: usize, fan_out: usize,
                    values: &mut Vec<f64>,
                    rng: &mut ChaCha8Rng| {
            let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
            for i in range {
                values[i] = rng.random_range(-bound..bound);
            }
        };
        fill(shape.d0_w1(), 3, shape.hidden, &mut values, rng);
        fill(shape.d0_w2(), shape.hidden, 1, &mut values, rng);
        fill(shape.d1_w(), shape.t_obs, 1, &mut values, rng);
        fill(shape.d2_w(), shape.n, shape.n, &mut values, rng);
        Self {
            shape,
            leaky_slope,
            l1_lambda,
            values,
        }
    }

    pub fn d2_weights(&self) -> &[f64] {
        &self.values[self.shape.d2_w()]
    }

    /// Forward pass over one window of `t_obs` frames; returns one success
    /// prediction in (0, 1) per vertex.
    pub fn forward(&self, window: &[FeatureFrame]) -> Vec<f64> {
        self.forward_cached(window).out
    }

    fn forward_cached(&self, window: &[FeatureFrame]) -> ForwardCache {
        let shape = self.shape;
        assert_eq!(window.len(), shape.t_obs, "window length != t_obs");
        assert!(
            window.iter().all(|f| f.vertex_count() == shape.n),
            "feature frame vertex count != n"
        );
        let p = &self.values;
        let slope = self.leaky_slope;
        let h = shape.hidden;

        // D0 over each (vertex, timestep) triple.
        let mut h1_pre = vec![0.0; shape.n * shape.t_obs * h];
        let mut a_pre = vec![0.0; shape.n * shape.t_obs];
        let mut a = vec![0.0; shape.n * shape.t_obs];
        let w1 = &p[shape.d0_w1()];
        let b1 = &p[shape.d0_b1()];
        let w2 = &p[shape.d0_w2()];
        let b2 = p[shape.d0_b2()];
        for x in 0..shape.n {
            for j in 0..shape.t_obs {
                let input = &window[j].values[x];
                let base = (x * shape.t_obs + j) * h;
                let mut s2 = b2;
                for k in 0..h {
                    let pre = w1[k * 3] * input[0]
                        + w1[k * 3 + 1] * input[1]
                        + w1[k * 3 + 2] * input[2]
                        + b1[k];
                    h1_pre[base + k] = pre;
                    s2 += w2[k] * leaky(pre, slope);
                }
                a_pre[x * shape.t_obs + j] = s2;
                a[x * shape.t_obs + j] = leaky(s2, slope);
            }
        }

        // D1 over each vertex's time series.
        let d1w = &p[shape.d1_w()];
        let d1b = p[shape.d1_b()];
        let mut b_pre = vec![0.0; shape.n];
        let mut b = vec![0.0; shape.n];
        for x in 0..shape.n {
            let mut s = d1b;
            for j in 0..shape.t_obs {
                s += d1w[j] * a[x * shape.t_obs + j];
            }
            b_pre[x] = s;
            b[x] = leaky(s, slope);
        }

        // D2 with sigmoid.
        let d2w = &p[shape.d2_w()];
        let d2b = &p[shape.d2_b()];
        let mut out = vec![0.0; shape.n];
        for y in 0..shape.n {
            let mut z = d2b[y];
            for x in 0..shape.n {
                z += d2w[y * shape.n + x] * b[x];
            }
            out[y] = sigmoid(z);
        }

        ForwardCache {
            h1_pre,
            a_pre,
            a,
            b_pre,
            b,
            out,
        }
    }

    /// Mean binary cross-entropy over the batch and vertices, plus the D2
    /// l1 penalty. Gradients are exact reverse-mode derivatives of the
    /// returned loss (including the clamp: saturated predictions contribute
    /// zero gradient).
    pub fn loss_and_gradients(
        &self,
        batch: &[(&[FeatureFrame], &[bool])],
    ) -> (f64, Vec<f64>) {
        assert!(!batch.is_empty());
        let shape = self.shape;
        let slope = self.leaky_slope;
        let h = shape.hidden;
        let p = &self.values;
        let w2 = &p[shape.d0_w2()];
        let d1w = &p[shape.d1_w()];
        let d2w = &p[shape.d2_w()];

        let mut grads = vec![0.0; shape.param_count()];
        let mut loss = 0.0;
        let denom = (batch.len() * shape.n) as f64;

        for &(window, labels) in batch {
            assert_eq!(labels.len(), shape.n);
            let cache = self.forward_cached(window);

            // Output layer: BCE through sigmoid gives dL/dz = p - y.
            let mut dz = vec![0.0; shape.n];
            for y in 0..shape.n {
                let pred = cache.out[y];
                let clamped = pred.clamp(BCE_EPS, 1.0 - BCE_EPS);
                let label = if labels[y] { 1.0 } else { 0.0 };
                loss -= (label * clamped.ln() + (1.0 - label) * (1.0 - clamped).ln()) / denom;
                dz[y] = if (BCE_EPS..=1.0 - BCE_EPS).contains(&pred) {
                    (pred - label) / denom
                } else {
                    0.0
                };
            }

            // D2 backward.
            let mut db = vec![0.0; shape.n];
            {
                let gw = &mut grads[shape.d2_w()];
                for y in 0..shape.n {
                    for x in 0..shape.n {
                        gw[y * shape.n + x] += dz[y] * cache.b[x];
                        db[x] += dz[y] * d2w[y * shape.n + x];
                    }
                }
            }
            {
                let gb = &mut grads[shape.d2_b()];
                for y in 0..shape.n {
                    gb[y] += dz[y];
                }
            }

            // D1 backward.
            let mut da = vec![0.0; shape.n * shape.t_obs];
            for x in 0..shape.n {
                let du = db[x] * leaky_grad(cache.b_pre[x], slope);
                grads[shape.d1_b()] += du;
                let gw = &mut grads[shape.d1_w()];
                for j in 0..shape.t_obs {
                    gw[j] += du * cache.a[x * shape.t_obs + j];
                    da[x * shape.t_obs + j] = du * d1w[j];
                }
            }

            // D0 backward.
            for x in 0..shape.n {
                for j in 0..shape.t_obs {
                    let idx = x * shape.t_obs + j;
                    let ds2 = da[idx] * leaky_grad(cache.a_pre[idx], slope);
                    grads[shape.d0_b2()] += ds2;
                    let base = idx * h;
                    let input = &window[j].values[x];
                    for k in 0..h {
                        let h1 = leaky(cache.h1_pre[base + k], slope);
                        grads[shape.d0_w2().start + k] += ds2 * h1;
                        let dh_pre = ds2 * w2[k] * leaky_grad(cache.h1_pre[base + k], slope);
                        grads[shape.d0_b1().start + k] += dh_pre;
                        let gw1 = shape.d0_w1().start + k * 3;
                        grads[gw1] += dh_pre * input[0];
                        grads[gw1 + 1] += dh_pre * input[1];
                        grads[gw1 + 2] += dh_pre * input[2];
                    }
                }
            }
        }

        // D2 l1 penalty: factor lambda / (number of D2 weights), bias excluded.
        let factor = self.l1_lambda / (shape.n * shape.n) as f64;
        let gw = &mut grads[shape.d2_w()];
        for (g, &w) in gw.iter_mut().zip(d2w) {
            loss += factor * w.abs();
            if w != 0.0 {
                *g += factor * w.signum();
            }
        }

        (loss, grads)
    }
}

struct ForwardCache {
    h1_pre: Vec<f64>,
    a_pre: Vec<f64>,
    a: Vec<f64>,
    b_pre: Vec<f64>,
    b: Vec<f64>,
    out: Vec<f64>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn shape(n: usize, t_obs: usize) -> NetworkShape {
        NetworkShape { n, t_obs, hidden: 6 }
    }

    fn random_window(shape: NetworkShape, rng: &mut ChaCha8Rng) -> Vec<FeatureFrame> {
        (0..shape.t_obs)
            .map(|_| FeatureFrame {
                values: (0..shape.n)
                    .map(|_| {
                        [
                            rng.random_range(0.01..2.0),
                            rng.random_range(-1.0..1.0),
                            rng.random_range(0.0..3.0),
                        ]
                    })
                    .collect(),
            })
            .collect()
    }

    #[test]
    fn zero_params_predict_half() {
        let s = shape(7, 10);
        let params = NetworkParams {
            shape: s,
            leaky_slope: 0.3,
            l1_lambda: 0.1,
            values: vec![0.0; s.param_count()],
        };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let window = random_window(s, &mut rng);
        let out = params.forward(&window);
        assert_eq!(out.len(), 7);
        assert!(out.iter().all(|&p| p == 0.5));
    }

    #[test]
    fn outputs_in_open_unit_interval() {
        let s = shape(7, 10);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let params = NetworkParams::init(s, 0.3, 0.1, &mut rng);
        let window = random_window(s, &mut rng);
        let out = params.forward(&window);
        assert_eq!(out.len(), 7);
        assert!(out.iter().all(|&p| p > 0.0 && p < 1.0));
    }

    /// Straight-line scalar recomputation of the same arithmetic, kept free
    /// of the production helpers on purpose.
    fn oracle_forward(params: &NetworkParams, window: &[FeatureFrame]) -> Vec<f64> {
        let s = params.shape;
        let v = &params.values;
        let slope = params.leaky_slope;
        let lrelu = |x: f64| if x >= 0.0 { x } else { slope * x };
        let h = s.hidden;
        let w1_at = |k: usize, c: usize| v[k * 3 + c];
        let b1_at = |k: usize| v[h * 3 + k];
        let w2_at = |k: usize| v[h * 4 + k];
        let b2 = v[h * 5];
        let d1w_at = |j: usize| v[h * 5 + 1 + j];
        let d1b = v[h * 5 + 1 + s.t_obs];
        let d2w_at = |y: usize, x: usize| v[h * 5 + 2 + s.t_obs + y * s.n + x];
        let d2b_at = |y: usize| v[h * 5 + 2 + s.t_obs + s.n * s.n + y];

        let mut b_vec = vec![0.0; s.n];
        for x in 0..s.n {
            let mut d1_sum = d1b;
            for j in 0..s.t_obs {
                let inp = window[j].values[x];
                let mut s2 = b2;
                for k in 0..h {
                    let pre =
                        w1_at(k, 0) * inp[0] + w1_at(k, 1) * inp[1] + w1_at(k, 2) * inp[2] + b1_at(k);
                    s2 += w2_at(k) * lrelu(pre);
                }
                d1_sum += d1w_at(j) * lrelu(s2);
            }
            b_vec[x] = lrelu(d1_sum);
        }
        (0..s.n)
            .map(|y| {
                let mut z = d2b_at(y);
                for x in 0..s.n {
                    z += d2w_at(y, x) * b_vec[x];
                }
                1.0 / (1.0 + (-z).exp())
            })
            .collect()
    }

    #[test]
    fn forward_matches_independent_recomputation() {
        for seed in 0..20 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let s = shape(3, 2);
            let params = NetworkParams::init(s, 0.3, 0.1, &mut rng);
            let window = random_window(s, &mut rng);
            let got = params.forward(&window);
            let want = oracle_forward(&params, &window);
            for (g, w) in got.iter().zip(&want) {
                assert!((g - w).abs() < 1e-10, "forward mismatch: {g} vs {w}");
            }
        }
    }

    #[test]
    fn bce_at_half_is_ln_two() {
        let s = shape(3, 2);
        let params = NetworkParams {
            shape: s,
            leaky_slope: 0.3,
            l1_lambda: 0.0,
            values: vec![0.0; s.param_count()],
        };
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let window = random_window(s, &mut rng);
        let labels = vec![true, false, true];
        let (loss, _) = params.loss_and_gradients(&[(&window, &labels)]);
        assert!((loss - std::f64::consts::LN_2).abs() < 1e-12, "loss {loss}");
    }

    #[test]
    fn l1_penalty_scales_by_weight_count() {
        let s = shape(3, 2);
        let mut values = vec![0.0; s.param_count()];
        for i in s.d2_w() {
            values[i] = -0.7;
        }
        let params = NetworkParams {
            shape: s,
            leaky_slope: 0.3,
            l1_lambda: 0.1,
            values,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let window = random_window(s, &mut rng);
        let labels = vec![true, false, true];
        let (loss, _) = params.loss_and_gradients(&[(&window, &labels)]);
        // All |w| = 0.7 in D2, so the penalty is exactly lambda * 0.7;
        // subtract the BCE part measured at lambda = 0.
        let mut no_l1 = params.clone();
        no_l1.l1_lambda = 0.0;
        let (bce, _) = no_l1.loss_and_gradients(&[(&window, &labels)]);
        assert!((loss - bce - 0.1 * 0.7).abs() < 1e-12);
    }

    #[test]
    fn gradients_match_finite_differences() {
        let mut failures = Vec::new();
        for seed in 0..50u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
            let n = 2 + (seed as usize) % 4; // 2..=5
            let t_obs = 2 + (seed as usize / 4) % 5; // 2..=6
            let s = shape(n, t_obs);
            let params = NetworkParams::init(s, 0.3, 0.1, &mut rng);
            let windows: Vec<Vec<FeatureFrame>> =
                (0..3).map(|_| random_window(s, &mut rng)).collect();
            let labels: Vec<Vec<bool>> = (0..3)
                .map(|_| (0..n).map(|_| rng.random_range(0..2) == 1).collect())
                .collect();
            let batch: Vec<(&[FeatureFrame], &[bool])> = windows
                .iter()
                .zip(&labels)
                .map(|(w, l)| (w.as_slice(), l.as_slice()))
                .collect();
            let (_, analytic) = params.loss_and_gradients(&batch);

            let step = 1e-5;
            for i in 0..s.param_count() {
                let mut plus = params.clone();
                plus.values[i] += step;
                let (lp, _) = plus.loss_and_gradients(&batch);
                let mut minus = params.clone();
                minus.values[i] -= step;
                let (lm, _) = minus.loss_and_gradients(&batch);
                let fd = (lp - lm) / (2.0 * step);
                let denom = analytic[i].abs().max(fd.abs()).max(1e-6);
                let rel = (analytic[i] - fd).abs() / denom;
                if rel >= 1e-4 {
                    failures.push((seed, i, analytic[i], fd, rel));
                }
            }
        }
        assert!(failures.is_empty(), "gradient mismatches: {failures:?}");
    }
}
