//! Tabular episodic general-sum Markov games.
//!
//! Steps are 0-based in every API (`step ∈ [0, H)`); the JSON and CSV file
//! formats use 1-based `h` only where documented. Joint actions are flattened
//! row-major: `index = Σ_i a^i · Π_{j>i} A^j`, so agent 0 is the most
//! significant digit.

mod eval;
mod sim;

use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub(crate) use eval::argmax_lowest;
pub use eval::{best_response, evaluate_joint_policy, ne_gap, MarkovPolicy, ValueTable};
pub use sim::{sample_episode, Actor, EpisodeRecord, Observation, RewardModel, StepRecord};

/// Tolerance for a probability vector to count as summing to one.
pub const SIMPLEX_TOL: f64 = 1e-12;
/// Rows within this distance of one are renormalized on load.
pub const RENORMALIZE_TOL: f64 = 1e-9;

/// Flattening helper for joint actions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JointActions {
    counts: Vec<usize>,
    strides: Vec<usize>,
    total: usize,
}

impl JointActions {
    pub fn new(counts: &[usize]) -> Self {
        let mut strides = vec![1; counts.len()];
        for i in (0..counts.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * counts[i + 1];
        }
        let total = counts.iter().product();
        JointActions {
            counts: counts.to_vec(),
            strides,
            total,
        }
    }

    pub fn len(&self) -> usize {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn encode(&self, actions: &[usize]) -> usize {
        actions
            .iter()
            .zip(&self.strides)
            .map(|(a, s)| a * s)
            .sum()
    }

    /// Action of `agent` inside flattened joint action `joint`.
    #[inline]
    pub fn component(&self, joint: usize, agent: usize) -> usize {
        (joint / self.strides[agent]) % self.counts[agent]
    }

    pub fn decode_into(&self, joint: usize, out: &mut [usize]) {
        for (i, slot) in out.iter_mut().enumerate() {
            *slot = self.component(joint, i);
        }
    }

    pub fn decode(&self, joint: usize) -> Vec<usize> {
        let mut out = vec![0; self.counts.len()];
        self.decode_into(joint, &mut out);
        out
    }
}

/// An N-player episodic Markov game with deterministic rewards.
///
/// `rewards[step][state][joint][agent]` and
/// `transitions[step][state][joint][next_state]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarkovGame {
    pub num_agents: usize,
    pub horizon: usize,
    pub num_states: usize,
    pub action_counts: Vec<usize>,
    pub initial_state: usize,
    pub rewards: Vec<Vec<Vec<Vec<f64>>>>,
    pub transitions: Vec<Vec<Vec<Vec<f64>>>>,
}

/// One violated invariant, located precisely.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    Shape(String),
    InitialState(usize),
    TransitionSum {
        step: usize,
        state: usize,
        joint: usize,
        sum: f64,
    },
    NegativeProbability {
        step: usize,
        state: usize,
        joint: usize,
        next: usize,
        value: f64,
    },
    RewardRange {
        step: usize,
        state: usize,
        joint: usize,
        agent: usize,
        value: f64,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Shape(msg) => write!(f, "shape: {msg}"),
            Violation::InitialState(s) => write!(f, "initial state {s} out of range"),
            Violation::TransitionSum {
                step,
                state,
                joint,
                sum,
            } => write!(
                f,
                "transition row (h={}, s={state}, a={joint}) sums to {sum}",
                step + 1
            ),
            Violation::NegativeProbability {
                step,
                state,
                joint,
                next,
                value,
            } => write!(
                f,
                "transition (h={}, s={state}, a={joint}) -> {next} has negative mass {value}",
                step + 1
            ),
            Violation::RewardRange {
                step,
                state,
                joint,
                agent,
                value,
            } => write!(
                f,
                "reward (h={}, s={state}, a={joint}) for agent {agent} is {value}, outside [0, 1]",
                step + 1
            ),
        }
    }
}

impl MarkovGame {
    pub fn joint_actions(&self) -> JointActions {
        JointActions::new(&self.action_counts)
    }

    pub fn num_joint_actions(&self) -> usize {
        self.action_counts.iter().product()
    }

    pub fn max_actions(&self) -> usize {
        self.action_counts.iter().copied().max().unwrap_or(0)
    }

    #[inline]
    pub fn reward(&self, step: usize, state: usize, joint: usize, agent: usize) -> f64 {
        self.rewards[step][state][joint][agent]
    }

    #[inline]
    pub fn transition(&self, step: usize, state: usize, joint: usize) -> &[f64] {
        &self.transitions[step][state][joint]
    }

    /// Lists every violated invariant. Empty iff the game is well-formed.
    pub fn validate(&self) -> Vec<Violation> {
        let mut report = Vec::new();
        if self.num_agents == 0 || self.horizon == 0 || self.num_states == 0 {
            report.push(Violation::Shape(format!(
                "num_agents={}, horizon={}, num_states={} must all be positive",
                self.num_agents, self.horizon, self.num_states
            )));
            return report;
        }
        if self.action_counts.len() != self.num_agents {
            report.push(Violation::Shape(format!(
                "action_counts has {} entries for {} agents",
                self.action_counts.len(),
                self.num_agents
            )));
            return report;
        }
        if let Some(i) = self.action_counts.iter().position(|&a| a == 0) {
            report.push(Violation::Shape(format!("agent {i} has zero actions")));
            return report;
        }
        if self.initial_state >= self.num_states {
            report.push(Violation::InitialState(self.initial_state));
        }
        let joint = self.num_joint_actions();
        if let Some(msg) = self.shape_error(joint) {
            report.push(Violation::Shape(msg));
            return report;
        }
        for step in 0..self.horizon {
            for state in 0..self.num_states {
                for a in 0..joint {
                    let row = &self.transitions[step][state][a];
                    for (next, &p) in row.iter().enumerate() {
                        if !(p >= 0.0) {
                            report.push(Violation::NegativeProbability {
                                step,
                                state,
                                joint: a,
                                next,
                                value: p,
                            });
                        }
                    }
                    let sum: f64 = row.iter().sum();
                    if !((sum - 1.0).abs() <= SIMPLEX_TOL) {
                        report.push(Violation::TransitionSum {
                            step,
                            state,
                            joint: a,
                            sum,
                        });
                    }
                    for (agent, &r) in self.rewards[step][state][a].iter().enumerate() {
                        if !(0.0..=1.0).contains(&r) {
                            report.push(Violation::RewardRange {
                                step,
                                state,
                                joint: a,
                                agent,
                                value: r,
                            });
                        }
                    }
                }
            }
        }
        report
    }

    fn shape_error(&self, joint: usize) -> Option<String> {
        let check = |name: &str, table: &Vec<Vec<Vec<Vec<f64>>>>, inner: usize| -> Option<String> {
            if table.len() != self.horizon {
                return Some(format!("{name} has {} steps, expected {}", table.len(), self.horizon));
            }
            for (h, per_state) in table.iter().enumerate() {
                if per_state.len() != self.num_states {
                    return Some(format!(
                        "{name}[h={}] has {} states, expected {}",
                        h + 1,
                        per_state.len(),
                        self.num_states
                    ));
                }
                for (s, per_joint) in per_state.iter().enumerate() {
                    if per_joint.len() != joint {
                        return Some(format!(
                            "{name}[h={}][s={s}] has {} joint actions, expected {joint}",
                            h + 1,
                            per_joint.len()
                        ));
                    }
                    for (a, row) in per_joint.iter().enumerate() {
                        if row.len() != inner {
                            return Some(format!(
                                "{name}[h={}][s={s}][a={a}] has length {}, expected {inner}",
                                h + 1,
                                row.len()
                            ));
                        }
                    }
                }
            }
            None
        };
        check("rewards", &self.rewards, self.num_agents)
            .or_else(|| check("transitions", &self.transitions, self.num_states))
    }

    /// Rescales transition rows whose sum is within [`RENORMALIZE_TOL`] of one.
    pub fn renormalize(&mut self) {
        for row in self.transitions.iter_mut().flatten().flatten() {
            let sum: f64 = row.iter().sum();
            let off = (sum - 1.0).abs();
            // Rows already stochastic up to rounding are left alone so that
            // load/save round trips are bit-exact.
            if sum > 0.0 && off > 1e-12 && off <= RENORMALIZE_TOL {
                row.iter_mut().for_each(|p| *p /= sum);
            }
        }
    }

    /// Renormalizes, validates, and turns a non-empty report into an error.
    pub fn checked(mut self) -> Result<Self> {
        if self.shape_error_free() {
            self.renormalize();
        }
        let report = self.validate();
        if report.is_empty() {
            Ok(self)
        } else {
            let lines: Vec<String> = report.iter().map(|v| v.to_string()).collect();
            Err(Error::InvalidGame(lines.join("; ")))
        }
    }

    fn shape_error_free(&self) -> bool {
        self.num_agents > 0
            && self.action_counts.len() == self.num_agents
            && self.action_counts.iter().all(|&a| a > 0)
            && self.shape_error(self.num_joint_actions()).is_none()
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let game: MarkovGame = serde_json::from_str(text)?;
        game.checked()
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)?;
        let game: MarkovGame = serde_json::from_str(&text).map_err(|e| Error::Parse {
            location: format!("{}:{}:{}", path.display(), e.line(), e.column()),
            message: e.to_string(),
        })?;
        game.checked()
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_json_string()? + "\n")?;
        Ok(())
    }

    /// Builds a single-stage (H = 1, S = 1) game from per-joint-action payoffs.
    pub fn normal_form(action_counts: Vec<usize>, payoffs: Vec<Vec<f64>>) -> Result<Self> {
        let num_agents = action_counts.len();
        let joint: usize = action_counts.iter().product();
        if payoffs.len() != joint {
            return Err(Error::Dimension(format!(
                "{} payoff rows for {joint} joint actions",
                payoffs.len()
            )));
        }
        MarkovGame {
            num_agents,
            horizon: 1,
            num_states: 1,
            action_counts,
            initial_state: 0,
            rewards: vec![vec![payoffs]],
            transitions: vec![vec![vec![vec![1.0]; joint]]],
        }
        .checked()
    }
}
