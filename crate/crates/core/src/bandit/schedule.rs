//! Step-size, bonus, exploration and mixing schedules.
//!
//! All logarithms are natural.

use crate::error::{Error, Result};

/// Inputs shared by every schedule of one learner.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScheduleParams {
    /// Episode length `H` (1 for plain bandits).
    pub horizon: usize,
    /// Bonus constant `c`.
    pub bonus_constant: f64,
    /// Log factor `ι`.
    pub iota: f64,
}

impl ScheduleParams {
    pub fn new(horizon: usize, bonus_constant: f64, iota: f64) -> Result<Self> {
        if horizon == 0 {
            return Err(Error::Config("horizon must be positive".into()));
        }
        if !(bonus_constant > 0.0) || !(iota > 0.0) {
            return Err(Error::Config(format!(
                "bonus constant ({bonus_constant}) and iota ({iota}) must be positive"
            )));
        }
        Ok(ScheduleParams {
            horizon,
            bonus_constant,
            iota,
        })
    }
}

/// Rates for visit `t` of one `(step, state)` context.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Schedule {
    /// `α_t = (H+1)/(H+t)`.
    pub alpha: f64,
    /// Optimism bonus `c·√(H⁴·A·ι/t)`.
    pub bonus: f64,
    /// Implicit-exploration parameter `√(ln A/(A t))`.
    pub gamma: f64,
    /// Learning rate, equal to `gamma`.
    pub eta: f64,
}

pub fn step_size(t: usize, horizon: usize) -> f64 {
    (horizon as f64 + 1.0) / (horizon as f64 + t as f64)
}

/// `√(ln A / (A t))`, zero for a single action.
pub fn learning_rate(t: usize, num_actions: usize) -> f64 {
    let a = num_actions as f64;
    (a.ln() / (a * t as f64)).sqrt()
}

pub fn schedules(t: usize, num_actions: usize, params: &ScheduleParams) -> Result<Schedule> {
    if t == 0 {
        return Err(Error::ZeroRound);
    }
    let h = params.horizon as f64;
    let rate = learning_rate(t, num_actions);
    Ok(Schedule {
        alpha: step_size(t, params.horizon),
        bonus: params.bonus_constant * (h.powi(4) * num_actions as f64 * params.iota / t as f64).sqrt(),
        gamma: rate,
        eta: rate,
    })
}

/// `ι = ln(2·S·max_actions·T/p)` with `T = K·H`.
pub fn iota(num_states: usize, max_actions: usize, total_steps: usize, p: f64) -> f64 {
    (2.0 * num_states as f64 * max_actions as f64 * total_steps as f64 / p).ln()
}

/// The step-size-induced mixture weights `α_t^i`, `i = 1..=t`, and `α_t^0`.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaWeights {
    /// `weights[i-1] = α_t^i`.
    pub weights: Vec<f64>,
    /// `α_t^0 = Π_{j≤t}(1-α_j)`.
    pub initial: f64,
}

pub fn alpha_weights(t: usize, horizon: usize) -> AlphaWeights {
    let mut weights = vec![0.0; t];
    let mut tail = 1.0;
    for i in (1..=t).rev() {
        let a = step_size(i, horizon);
        weights[i - 1] = a * tail;
        tail *= 1.0 - a;
    }
    AlphaWeights {
        weights,
        initial: tail,
    }
}

/// `w_i / w_{i+1} = α_i(1-α_{i+1})/α_{i+1}` for the weights `w_i = α_t^i`;
/// independent of `t`, which is what lets an anytime learner use it.
pub fn alpha_weight_ratio(i: usize, horizon: usize) -> f64 {
    let a = step_size(i, horizon);
    let b = step_size(i + 1, horizon);
    a * (1.0 - b) / b
}

/// Stabilization coefficient `η_{t+1} w_t / (η_t w_{t+1})` given the ratio
/// `w_t / w_{t+1}`. A zero learning rate (single action) yields 1.
pub fn stabilization(eta_t: f64, eta_next: f64, weight_ratio: f64) -> f64 {
    if eta_t == 0.0 {
        return weight_ratio.min(1.0);
    }
    eta_next / eta_t * weight_ratio
}

/// Mixing coefficient `λ_t = η_{t+1} α_t (1-α_{t+1}) / (η_t α_{t+1})` used
/// by the V-learning agent after each mirror step.
pub fn vlearning_mixing_coefficient(t: usize, horizon: usize, eta_t: f64, eta_next: f64) -> Result<f64> {
    if t == 0 {
        return Err(Error::ZeroRound);
    }
    Ok(stabilization(eta_t, eta_next, alpha_weight_ratio(t, horizon)))
}
