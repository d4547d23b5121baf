use crate::error::{Error, Result};

/// `Reg_t(θ*) = Σ_{i≤t} w_i <θ_i − θ*, l_i>` against the best fixed pure
/// action in hindsight (the minimizer over the simplex of a linear
/// function is a vertex). Uses full loss vectors.
pub fn weighted_regret(thetas: &[Vec<f64>], losses: &[Vec<f64>], weights: &[f64], t: usize) -> Result<f64> {
    if thetas.len() < t || losses.len() < t || weights.len() < t {
        return Err(Error::Dimension(format!(
            "regret up to round {t} needs {t} entries, got thetas={}, losses={}, weights={}",
            thetas.len(),
            losses.len(),
            weights.len()
        )));
    }
    if t == 0 {
        return Ok(0.0);
    }
    let a = losses[0].len();
    let mut cumulative = vec![0.0; a];
    let mut learner = 0.0;
    for i in 0..t {
        if thetas[i].len() != a || losses[i].len() != a {
            return Err(Error::Dimension(format!("round {} has mismatched action counts", i + 1)));
        }
        let w = weights[i];
        learner += w * dot(&thetas[i], &losses[i]);
        for (c, l) in cumulative.iter_mut().zip(&losses[i]) {
            *c += w * l;
        }
    }
    let best = cumulative.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(learner - best)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// High-probability weighted-regret bound of the stabilized OMD learner:
/// `2 max w √(A t ι) + (3√(Aι)/2) Σ w_i/√i + (1/2) max w ι + √(2ι Σ w_i²)`.
pub fn regret_bound(weights: &[f64], num_actions: usize, iota: f64) -> f64 {
    let t = weights.len() as f64;
    let a = num_actions as f64;
    let max_w = weights.iter().copied().fold(0.0, f64::max);
    let harmonic: f64 = weights
        .iter()
        .enumerate()
        .map(|(i, w)| w / ((i + 1) as f64).sqrt())
        .sum();
    let squares: f64 = weights.iter().map(|w| w * w).sum();
    2.0 * max_w * (a * t * iota).sqrt()
        + 1.5 * (a * iota).sqrt() * harmonic
        + 0.5 * max_w * iota
        + (2.0 * iota * squares).sqrt()
}

/// Log factor for the stand-alone bandit bound, `ln(A t / p)`.
pub fn bandit_iota(num_actions: usize, t: usize, p: f64) -> f64 {
    (num_actions as f64 * t as f64 / p).ln()
}
