//! Small helpers for probability vectors.

use rand::Rng;

/// Neumaier-compensated sum.
pub fn compensated_sum(values: &[f64]) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for &v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Scales `values` in place to sum to one. Returns the pre-normalization sum.
pub fn normalize(values: &mut [f64]) -> f64 {
    let total = compensated_sum(values);
    values.iter_mut().for_each(|v| *v /= total);
    total
}

pub fn uniform(n: usize) -> Vec<f64> {
    vec![1.0 / n as f64; n]
}

/// True when `p` is nonnegative and sums to one within `tol`.
pub fn is_distribution(p: &[f64], tol: f64) -> bool {
    !p.is_empty() && p.iter().all(|&x| x >= 0.0) && (compensated_sum(p) - 1.0).abs() <= tol
}

/// Inverse-CDF draw from a categorical distribution.
///
/// Consumes exactly one `f64` from `rng` regardless of the outcome, which
/// keeps streams aligned across agents that share a seed.
pub fn sample_index<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p > 0.0 {
            last_positive = i;
            acc += p;
            if u < acc {
                return i;
            }
        }
    }
    last_positive
}
