//! Adversarial bandits: stabilized online mirror descent with implicit
//! exploration and weighted regret, Exp3 as its unit-weight case, and
//! regret evaluators.

pub mod adversary;
pub mod learner;
pub mod omd;
pub mod regret;
pub mod schedule;

use rand::RngCore;

pub use adversary::{build_adversary, LossAdversary};
pub use learner::{build_learner, BanditLearner, LearnerSpec, StabilizedOmd, Weighting};
pub use omd::{LossEstimate, OmdState, OmdStep, OmdUpdate};
pub use regret::{bandit_iota, regret_bound, weighted_regret};
pub use schedule::{
    alpha_weights, schedules, vlearning_mixing_coefficient, AlphaWeights, Schedule, ScheduleParams,
};

use crate::error::Result;

/// Everything that happened in a bandit run, with full-information losses
/// kept for the omniscient regret evaluator.
#[derive(Debug, Clone, Default)]
pub struct BanditTrace {
    pub thetas: Vec<Vec<f64>>,
    pub losses: Vec<Vec<f64>>,
    pub actions: Vec<usize>,
}

impl BanditTrace {
    pub fn rounds(&self) -> usize {
        self.actions.len()
    }

    pub fn realized_losses(&self) -> Vec<f64> {
        self.actions
            .iter()
            .zip(&self.losses)
            .map(|(&a, l)| l[a])
            .collect()
    }
}

pub fn run_bandit(
    learner: &mut dyn BanditLearner,
    adversary: &mut dyn LossAdversary,
    rounds: usize,
    rng: &mut dyn RngCore,
) -> Result<BanditTrace> {
    let mut trace = BanditTrace::default();
    for round in 1..=rounds {
        let theta = learner.distribution().to_vec();
        let losses = adversary.losses(round, &theta, rng);
        let action = learner.sample(rng);
        learner.update(action, losses[action])?;
        trace.thetas.push(theta);
        trace.losses.push(losses);
        trace.actions.push(action);
    }
    Ok(trace)
}

/// One row of an exported regret trace.
#[derive(Debug, Clone, PartialEq)]
pub struct RegretRow {
    pub round: usize,
    pub weight: f64,
    pub realized_loss: f64,
    pub regret: f64,
    pub bound: f64,
}

/// Running regret and bound for every prefix `1..=t` using unit weights.
pub fn unit_regret_rows(trace: &BanditTrace, iota_p: f64) -> Vec<RegretRow> {
    let a = trace.thetas.first().map_or(1, Vec::len);
    let af = a as f64;
    let mut cumulative = vec![0.0; a];
    let mut learner = 0.0;
    let mut harmonic = 0.0;
    let mut rows = Vec::with_capacity(trace.rounds());
    for (i, (theta, losses)) in trace.thetas.iter().zip(&trace.losses).enumerate() {
        learner += theta.iter().zip(losses).map(|(p, l)| p * l).sum::<f64>();
        for (c, l) in cumulative.iter_mut().zip(losses) {
            *c += l;
        }
        let t = i + 1;
        let tf = t as f64;
        harmonic += 1.0 / tf.sqrt();
        let iota = bandit_iota(a, t, iota_p);
        let best = cumulative.iter().copied().fold(f64::INFINITY, f64::min);
        rows.push(RegretRow {
            round: t,
            weight: 1.0,
            realized_loss: losses[trace.actions[i]],
            regret: learner - best,
            bound: 2.0 * (af * tf * iota).sqrt()
                + 1.5 * (af * iota).sqrt() * harmonic
                + 0.5 * iota
                + (2.0 * iota * tf).sqrt(),
        });
    }
    rows
}
