//! The decentralized optimistic V-learning agent.
//!
//! Each agent keeps, per `(step, state)`, a visit count, an optimistic value
//! estimate and a mixed strategy that is updated by stabilized OMD on the
//! loss `(H − r − V̄_{h+1}(s'))/H`. It sees states, its own actions and its
//! own rewards, nothing else.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::bandit::schedule::{alpha_weights, learning_rate, schedules, vlearning_mixing_coefficient};
use crate::bandit::{OmdState, ScheduleParams};
use crate::error::{Error, Result};
use crate::game::{Actor, Observation};
use crate::simplex::{sample_index, uniform};

/// The strategy an agent used at one visit, recorded before that visit's update.
#[derive(Debug, Clone, PartialEq)]
pub struct VisitSnapshot {
    /// 1-based episode index.
    pub episode: usize,
    pub step: usize,
    pub state: usize,
    pub theta: Vec<f64>,
}

/// What one update consumed, enough to recompute the value in closed form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogEntry {
    pub reward: f64,
    pub next_value: f64,
    pub bonus: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AgentState {
    num_actions: usize,
    num_states: usize,
    params: ScheduleParams,
    visits: Vec<usize>,
    value: Vec<f64>,
    /// `H + 1` rows; the last stays zero.
    clipped: Vec<f64>,
    theta: Vec<Vec<f64>>,
    log: Option<Vec<Vec<LogEntry>>>,
}

impl AgentState {
    pub fn new(num_actions: usize, num_states: usize, params: ScheduleParams) -> Result<Self> {
        if num_actions == 0 || num_states == 0 {
            return Err(Error::Config("agents need at least one action and one state".into()));
        }
        let h = params.horizon;
        let cells = h * num_states;
        let mut value = vec![0.0; cells];
        for step in 0..h {
            for s in 0..num_states {
                value[step * num_states + s] = (h - step) as f64;
            }
        }
        let mut clipped = value.clone();
        clipped.extend(std::iter::repeat_n(0.0, num_states));
        Ok(AgentState {
            num_actions,
            num_states,
            params,
            visits: vec![0; cells],
            value,
            clipped,
            theta: vec![uniform(num_actions); cells],
            log: None,
        })
    }

    /// Keeps every update's inputs so [`AgentState::reconstruct_value`] works.
    pub fn with_log(mut self) -> Self {
        self.log = Some(vec![Vec::new(); self.visits.len()]);
        self
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn horizon(&self) -> usize {
        self.params.horizon
    }

    pub fn params(&self) -> &ScheduleParams {
        &self.params
    }

    fn cell(&self, step: usize, state: usize) -> Result<usize> {
        if step >= self.params.horizon || state >= self.num_states {
            return Err(Error::IndexOutOfRange { step, state });
        }
        Ok(step * self.num_states + state)
    }

    pub fn visits(&self, step: usize, state: usize) -> usize {
        self.visits[step * self.num_states + state]
    }

    pub fn value(&self, step: usize, state: usize) -> f64 {
        self.value[step * self.num_states + state]
    }

    /// `V̄`, with `step == H` giving the terminal zero.
    pub fn clipped_value(&self, step: usize, state: usize) -> f64 {
        self.clipped[step * self.num_states + state]
    }

    pub fn policy(&self, step: usize, state: usize) -> &[f64] {
        &self.theta[step * self.num_states + state]
    }

    /// Draws from the current strategy at `(step, state)`. The returned
    /// strategy is the one in force for this visit.
    pub fn act<R: rand::Rng + ?Sized>(&self, step: usize, state: usize, rng: &mut R) -> (usize, &[f64]) {
        let theta = self.policy(step, state);
        (sample_index(theta, rng), theta)
    }

    pub fn observe(&mut self, obs: &Observation) -> Result<()> {
        let &Observation {
            step,
            state,
            action,
            reward,
            next_state,
        } = obs;
        if !(0.0..=1.0).contains(&reward) {
            return Err(Error::RewardOutOfRange(reward));
        }
        let cell = self.cell(step, state)?;
        if next_state >= self.num_states {
            return Err(Error::IndexOutOfRange {
                step: step + 1,
                state: next_state,
            });
        }
        if action >= self.num_actions {
            return Err(Error::ActionOutOfRange {
                agent: 0,
                action,
                count: self.num_actions,
            });
        }
        let horizon = self.params.horizon;
        self.visits[cell] += 1;
        let t = self.visits[cell];
        let sch = schedules(t, self.num_actions, &self.params)?;
        let next_value = self.clipped[(step + 1) * self.num_states + next_state];
        self.value[cell] = (1.0 - sch.alpha) * self.value[cell] + sch.alpha * (reward + next_value + sch.bonus);
        self.clipped[cell] = self.value[cell].min((horizon - step) as f64);
        if let Some(log) = &mut self.log {
            log[cell].push(LogEntry {
                reward,
                next_value,
                bonus: sch.bonus,
            });
        }
        if self.num_actions > 1 {
            let loss = ((horizon as f64 - reward - next_value) / horizon as f64).clamp(0.0, 1.0);
            let mixing = vlearning_mixing_coefficient(t, horizon, sch.eta, learning_rate(t + 1, self.num_actions))?;
            let omd = OmdState {
                theta: std::mem::take(&mut self.theta[cell]),
                round: t,
            };
            self.theta[cell] = omd.update_with_mixing(action, loss, sch.eta, sch.gamma, mixing)?.next.theta;
        }
        Ok(())
    }

    /// The value at `(step, state)` recomputed from the visit log as the
    /// `α_t^i`-weighted sum of past targets.
    pub fn reconstruct_value(&self, step: usize, state: usize) -> Result<f64> {
        let cell = self.cell(step, state)?;
        let log = self
            .log
            .as_ref()
            .ok_or_else(|| Error::IncompleteLog("agent was created without a visit log".into()))?;
        if log[cell].len() != self.visits[cell] {
            return Err(Error::IncompleteLog(format!(
                "{} entries for {} visits",
                log[cell].len(),
                self.visits[cell]
            )));
        }
        Ok(reconstruct_value(&log[cell], (self.params.horizon - step) as f64, self.params.horizon))
    }
}

/// `α_t^0·cap + Σ_i α_t^i (r_i + V̄_i + β_i)` for a log of `t` entries, where
/// `cap` is the initial value `H − h + 1`.
pub fn reconstruct_value(log: &[LogEntry], cap: f64, horizon: usize) -> f64 {
    let w = alpha_weights(log.len(), horizon);
    let mut terms: Vec<f64> = log
        .iter()
        .zip(&w.weights)
        .map(|(e, a)| a * (e.reward + e.next_value + e.bonus))
        .collect();
    terms.push(w.initial * cap);
    crate::simplex::compensated_sum(&terms)
}

/// An [`AgentState`] wired into the episode simulator: owns its random
/// stream, counts episodes and records the strategy used at every visit.
#[derive(Debug, Clone)]
pub struct VLearner {
    pub state: AgentState,
    rng: ChaCha8Rng,
    episode: usize,
    record: bool,
    snapshots: Vec<VisitSnapshot>,
    initial_values: Vec<f64>,
}

impl VLearner {
    pub fn new(state: AgentState, rng: ChaCha8Rng) -> Self {
        VLearner {
            state,
            rng,
            episode: 0,
            record: true,
            snapshots: Vec::new(),
            initial_values: Vec::new(),
        }
    }

    pub fn from_seed(state: AgentState, seed: u64) -> Self {
        Self::new(state, ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn without_snapshots(mut self) -> Self {
        self.record = false;
        self
    }

    pub fn episodes(&self) -> usize {
        self.episode
    }

    pub fn snapshots(&self) -> &[VisitSnapshot] {
        &self.snapshots
    }

    /// `V̄_1(s_1)` as it stood at the start of each episode.
    pub fn initial_values(&self) -> &[f64] {
        &self.initial_values
    }
}

impl Actor for VLearner {
    fn act(&mut self, step: usize, state: usize) -> usize {
        if step == 0 {
            self.episode += 1;
            self.initial_values.push(self.state.clipped_value(0, state));
        }
        let (action, theta) = self.state.act(step, state, &mut self.rng);
        if self.record {
            self.snapshots.push(VisitSnapshot {
                episode: self.episode,
                step,
                state,
                theta: theta.to_vec(),
            });
        }
        action
    }

    fn observe(&mut self, obs: &Observation) -> Result<()> {
        self.state.observe(obs)
    }
}
