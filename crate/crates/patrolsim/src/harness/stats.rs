//! Interval estimates for adversary success probabilities.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Wilson score interval for a binomial proportion.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

pub const Z_95: f64 = 1.959963984540054;

/// Bootstrap quantile of `mean(b) - mean(a)` over paired outcome vectors.
/// Resamples index tuples with replacement; deterministic given the seed.
pub fn bootstrap_diff_quantile(
    a: &[bool],
    b: &[bool],
    quantile: f64,
    resamples: usize,
    seed: u64,
) -> f64 {
    assert_eq!(a.len(), b.len());
    assert!(!a.is_empty());
    let n = a.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut diffs = Vec::with_capacity(resamples);
    for _ in 0..resamples {
        let mut da = 0i64;
        for _ in 0..n {
            let i = rng.random_range(0..n);
            da += i64::from(b[i]) - i64::from(a[i]);
        }
        diffs.push(da as f64 / n as f64);
    }
    diffs.sort_by(f64::total_cmp);
    let idx = ((resamples as f64 - 1.0) * quantile).round() as usize;
    diffs[idx]
}
