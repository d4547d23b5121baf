//! Stabilized online mirror descent on the probability simplex with
//! implicit-exploration loss estimates.
//!
//! With the unnormalized negentropy `F(θ) = Σ θ(a) ln θ(a) − θ(a)` the
//! unconstrained mirror step has the closed form `θ̃(a) = θ(a)·exp(−η l̂(a))`
//! (first-order condition `η l̂ + ∇F(θ̃) − ∇F(θ) = 0` with `∇F = ln`). The
//! Bregman projection of a positive vector onto the simplex is
//! `argmin_θ Σ θ ln(θ/θ̃) − θ + θ̃`; its Lagrangian gives `θ = θ̃·e^{−ν}`,
//! i.e. plain normalization. Both steps are therefore computed exactly
//! without an inner solver.

use rand::Rng;

use crate::error::{Error, Result};
use crate::simplex::{normalize, sample_index, uniform};

/// Floor applied to probabilities before taking logarithms in diagnostics.
pub const LOG_FLOOR: f64 = 1e-300;

/// The learner's current simplex point and round counter.
#[derive(Debug, Clone, PartialEq)]
pub struct OmdState {
    pub theta: Vec<f64>,
    /// The round about to be played (starts at 1).
    pub round: usize,
}

/// Biased importance-weighted estimate `l̂(a) = l 1{a = a_t}/(θ(a)+γ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LossEstimate {
    pub values: Vec<f64>,
    pub action: usize,
    pub loss: f64,
}

/// Per-round rates for one update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OmdStep {
    pub weight: f64,
    pub next_weight: f64,
    pub eta: f64,
    pub next_eta: f64,
    pub gamma: f64,
}

/// Intermediate points of one update, for diagnostics and tests.
#[derive(Debug, Clone, PartialEq)]
pub struct OmdUpdate {
    pub estimate: LossEstimate,
    /// Unconstrained mirror step `θ̃_{t+1}`.
    pub unconstrained: Vec<f64>,
    /// Projection `θ'_{t+1}` onto the simplex.
    pub projected: Vec<f64>,
    /// Stabilization coefficient `β_t`.
    pub mixing: f64,
    pub next: OmdState,
}

impl OmdState {
    pub fn new(num_actions: usize) -> Self {
        OmdState {
            theta: uniform(num_actions),
            round: 1,
        }
    }

    pub fn num_actions(&self) -> usize {
        self.theta.len()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        sample_index(&self.theta, rng)
    }

    pub fn loss_estimate(&self, action: usize, loss: f64, gamma: f64) -> LossEstimate {
        let mut values = vec![0.0; self.theta.len()];
        values[action] = loss / (self.theta[action] + gamma);
        LossEstimate {
            values,
            action,
            loss,
        }
    }

    /// One round: estimate, mirror step, projection, mix with `θ_1 = 1/A`
    /// using `β_t = η_{t+1} w_t / (η_t w_{t+1})`.
    pub fn update(&self, action: usize, loss: f64, step: &OmdStep) -> Result<OmdUpdate> {
        let ratio = if step.next_weight > 0.0 {
            step.weight / step.next_weight
        } else {
            f64::INFINITY
        };
        let mixing = super::schedule::stabilization(step.eta, step.next_eta, ratio);
        self.update_with_mixing(action, loss, step.eta, step.gamma, mixing)
    }

    /// As [`OmdState::update`] with the stabilization coefficient given directly.
    pub fn update_with_mixing(
        &self,
        action: usize,
        loss: f64,
        eta: f64,
        gamma: f64,
        mixing: f64,
    ) -> Result<OmdUpdate> {
        if !(0.0..=1.0).contains(&loss) {
            return Err(Error::LossOutOfRange(loss));
        }
        if !(mixing > 0.0 && mixing <= 1.0) {
            return Err(Error::MixingOutOfRange(mixing));
        }
        if action >= self.theta.len() {
            return Err(Error::ActionOutOfRange {
                agent: 0,
                action,
                count: self.theta.len(),
            });
        }
        let estimate = self.loss_estimate(action, loss, gamma);
        let unconstrained: Vec<f64> = self
            .theta
            .iter()
            .zip(&estimate.values)
            .map(|(p, l)| p * (-eta * l).exp())
            .collect();
        let mut projected = unconstrained.clone();
        normalize(&mut projected);
        let base = 1.0 / self.theta.len() as f64;
        let mut theta: Vec<f64> = projected
            .iter()
            .map(|p| mixing * p + (1.0 - mixing) * base)
            .collect();
        normalize(&mut theta);
        Ok(OmdUpdate {
            estimate,
            unconstrained,
            projected,
            mixing,
            next: OmdState {
                theta,
                round: self.round + 1,
            },
        })
    }
}

/// Generalized KL divergence `D_F(u, v) = Σ u ln(u/v) − u + v`.
pub fn bregman_divergence(u: &[f64], v: &[f64]) -> f64 {
    u.iter()
        .zip(v)
        .map(|(&x, &y)| {
            let y = y.max(LOG_FLOOR);
            let term = if x > 0.0 { x * (x / y).ln() } else { 0.0 };
            term - x + y
        })
        .sum()
}
