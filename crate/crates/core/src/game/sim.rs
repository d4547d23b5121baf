use rand::Rng;

use super::MarkovGame;
use crate::error::{Error, Result};
use crate::simplex::sample_index;

/// What one agent is allowed to see after a step: its own action and reward
/// plus the shared state transition. Nothing about the other agents.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation {
    pub step: usize,
    pub state: usize,
    pub action: usize,
    pub reward: f64,
    pub next_state: usize,
}

/// A decentralized participant in an episode. Implementors own their
/// randomness so the environment never hands them another agent's stream.
pub trait Actor {
    fn act(&mut self, step: usize, state: usize) -> usize;
    fn observe(&mut self, obs: &Observation) -> Result<()>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RewardModel {
    /// Agents receive the mean reward `r_h(s, a)`.
    #[default]
    Deterministic,
    /// Agents receive an independent Bernoulli draw with the mean reward.
    Bernoulli,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub state: usize,
    pub joint_action: Vec<usize>,
    pub rewards: Vec<f64>,
    pub next_state: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct EpisodeRecord {
    pub steps: Vec<StepRecord>,
}

impl EpisodeRecord {
    pub fn states(&self) -> Vec<usize> {
        self.steps.iter().map(|s| s.state).collect()
    }

    pub fn returns(&self) -> Vec<f64> {
        let n = self.steps.first().map_or(0, |s| s.rewards.len());
        let mut out = vec![0.0; n];
        for step in &self.steps {
            for (acc, r) in out.iter_mut().zip(&step.rewards) {
                *acc += r;
            }
        }
        out
    }
}

/// Plays one episode from the initial state. The environment stream `rng`
/// drives transitions (and reward noise); actors draw from their own streams.
pub fn sample_episode<R: Rng + ?Sized>(
    game: &MarkovGame,
    actors: &mut [&mut dyn Actor],
    reward_model: RewardModel,
    rng: &mut R,
) -> Result<EpisodeRecord> {
    if actors.len() != game.num_agents {
        return Err(Error::Dimension(format!(
            "{} actors for a {}-agent game",
            actors.len(),
            game.num_agents
        )));
    }
    let ja = game.joint_actions();
    let mut state = game.initial_state;
    let mut steps = Vec::with_capacity(game.horizon);
    let mut joint_action = vec![0; game.num_agents];
    for step in 0..game.horizon {
        for (agent, actor) in actors.iter_mut().enumerate() {
            let a = actor.act(step, state);
            let count = game.action_counts[agent];
            if a >= count {
                return Err(Error::ActionOutOfRange {
                    agent,
                    action: a,
                    count,
                });
            }
            joint_action[agent] = a;
        }
        let joint = ja.encode(&joint_action);
        let means = &game.rewards[step][state][joint];
        let rewards: Vec<f64> = match reward_model {
            RewardModel::Deterministic => means.clone(),
            RewardModel::Bernoulli => means
                .iter()
                .map(|&m| if rng.gen::<f64>() < m { 1.0 } else { 0.0 })
                .collect(),
        };
        let next_state = sample_index(game.transition(step, state, joint), rng);
        for (agent, actor) in actors.iter_mut().enumerate() {
            actor.observe(&Observation {
                step,
                state,
                action: joint_action[agent],
                reward: rewards[agent],
                next_state,
            })?;
        }
        steps.push(StepRecord {
            state,
            joint_action: joint_action.clone(),
            rewards,
            next_state,
        });
        state = next_state;
    }
    Ok(EpisodeRecord { steps })
}
