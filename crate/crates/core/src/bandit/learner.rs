//! Name-addressable bandit learners.

use rand::RngCore;

use super::omd::OmdState;
use super::schedule::{alpha_weight_ratio, learning_rate, stabilization};
use crate::error::{Error, Result};

/// An adversarial-bandit learner over a fixed action set. Losses live in [0, 1].
pub trait BanditLearner: Send {
    fn name(&self) -> &'static str;

    fn distribution(&self) -> &[f64];

    fn sample(&self, rng: &mut dyn RngCore) -> usize {
        crate::simplex::sample_index(self.distribution(), rng)
    }

    fn update(&mut self, action: usize, loss: f64) -> Result<()>;

    /// Reward-to-loss convention `loss = 1 − reward`.
    fn update_reward(&mut self, action: usize, reward: f64) -> Result<()> {
        if !(0.0..=1.0).contains(&reward) {
            return Err(Error::RewardOutOfRange(reward));
        }
        self.update(action, 1.0 - reward)
    }
}

/// How the regret weights `w_i` enter the stabilization coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Weighting {
    /// `w_i ≡ 1`: Exp3.
    Unit,
    /// `w_i = α_t^i` for horizon `H`, through the `t`-free ratio identity.
    Alpha { horizon: usize },
}

/// Stabilized OMD with `γ_t = η_t = √(ln A/(A t))`.
#[derive(Debug, Clone)]
pub struct StabilizedOmd {
    state: OmdState,
    weighting: Weighting,
}

impl StabilizedOmd {
    pub fn new(num_actions: usize, weighting: Weighting) -> Self {
        StabilizedOmd {
            state: OmdState::new(num_actions),
            weighting,
        }
    }

    pub fn exp3(num_actions: usize) -> Self {
        Self::new(num_actions, Weighting::Unit)
    }

    pub fn state(&self) -> &OmdState {
        &self.state
    }

    /// `β_t` for the round about to be updated.
    pub fn mixing(&self) -> f64 {
        let t = self.state.round;
        let a = self.state.num_actions();
        let ratio = match self.weighting {
            Weighting::Unit => 1.0,
            Weighting::Alpha { horizon } => alpha_weight_ratio(t, horizon),
        };
        stabilization(learning_rate(t, a), learning_rate(t + 1, a), ratio)
    }
}

impl BanditLearner for StabilizedOmd {
    fn name(&self) -> &'static str {
        match self.weighting {
            Weighting::Unit => "exp3",
            Weighting::Alpha { .. } => "omd-alpha",
        }
    }

    fn distribution(&self) -> &[f64] {
        &self.state.theta
    }

    fn update(&mut self, action: usize, loss: f64) -> Result<()> {
        let t = self.state.round;
        let rate = learning_rate(t, self.state.num_actions());
        let mixing = self.mixing();
        self.state = self.state.update_with_mixing(action, loss, rate, rate, mixing)?.next;
        Ok(())
    }
}

/// Construction parameters every registered learner understands.
#[derive(Debug, Clone, Copy)]
pub struct LearnerSpec {
    pub num_actions: usize,
    pub horizon: usize,
}

pub struct LearnerEntry {
    pub name: &'static str,
    pub summary: &'static str,
    build: fn(&LearnerSpec) -> Box<dyn BanditLearner>,
}

static LEARNERS: &[LearnerEntry] = &[
    LearnerEntry {
        name: "exp3",
        summary: "stabilized OMD with unit regret weights",
        build: |spec| Box::new(StabilizedOmd::exp3(spec.num_actions)),
    },
    LearnerEntry {
        name: "omd-alpha",
        summary: "stabilized OMD with alpha_t^i regret weights for horizon H",
        build: |spec| {
            Box::new(StabilizedOmd::new(
                spec.num_actions,
                Weighting::Alpha {
                    horizon: spec.horizon,
                },
            ))
        },
    },
];

pub fn learners() -> &'static [LearnerEntry] {
    LEARNERS
}

pub fn build_learner(name: &str, spec: &LearnerSpec) -> Result<Box<dyn BanditLearner>> {
    LEARNERS
        .iter()
        .find(|e| e.name == name)
        .map(|e| (e.build)(spec))
        .ok_or_else(|| Error::UnknownName {
            kind: "bandit learner",
            name: name.to_string(),
            available: LEARNERS.iter().map(|e| e.name).collect::<Vec<_>>().join(", "),
        })
}
