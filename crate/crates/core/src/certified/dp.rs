//! Backward dynamic programming over the augmented index `(k, h, s)`.
//!
//! The value at `(step, state)` under pointer `k` depends on `k` only
//! through the visit prefix `t = N_h^k(s)`, so each cell stores one value per
//! prefix length, built by the step-size recurrence
//! `W(t) = (1 − α_t) W(t−1) + α_t G_t`. Prefix length zero (no earlier visit)
//! falls back to uniform play and keeps the pointer, which makes that value
//! depend on `k` itself; those entries are memoized by `(step, state, k)`.

use std::collections::HashMap;

use super::store::TrajectoryStore;
use crate::bandit::schedule::step_size;
use crate::game::{JointActions, MarkovGame};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Mode {
    /// Every agent follows the certified policy.
    OnPath,
    /// The agent picks its action knowing the pointer, not the sampled visit.
    IndexAware,
}

pub(crate) struct PointerDp<'a> {
    game: &'a MarkovGame,
    store: &'a TrajectoryStore,
    agent: usize,
    mode: Mode,
    ja: JointActions,
    /// `tables[step * S + s][t]` for `t ≥ 1` (index 0 unused).
    tables: Vec<Vec<f64>>,
    fallback: HashMap<(usize, usize, usize), f64>,
}

impl<'a> PointerDp<'a> {
    pub(crate) fn new(game: &'a MarkovGame, store: &'a TrajectoryStore, agent: usize, mode: Mode) -> Self {
        let mut dp = PointerDp {
            game,
            store,
            agent,
            mode,
            ja: game.joint_actions(),
            tables: vec![Vec::new(); game.horizon * game.num_states],
            fallback: HashMap::new(),
        };
        for step in (0..game.horizon).rev() {
            for s in 0..game.num_states {
                let table = dp.build_cell(step, s);
                dp.tables[step * game.num_states + s] = table;
            }
        }
        dp
    }

    /// `V_{k,h}(s)` for a 1-based pointer `k`; `step == H` gives 0.
    pub(crate) fn value(&mut self, step: usize, state: usize, k: usize) -> f64 {
        if step == self.game.horizon {
            return 0.0;
        }
        let t = self.store.visits_before(step, state, k);
        if t > 0 {
            return self.tables[step * self.game.num_states + state][t];
        }
        if let Some(&v) = self.fallback.get(&(step, state, k)) {
            return v;
        }
        let v = self.fallback_value(step, state, k);
        self.fallback.insert((step, state, k), v);
        v
    }

    /// Expected `r + P V(·, next)` for every joint action, indexed by joint action.
    fn targets(&mut self, step: usize, state: usize, next: usize) -> Vec<f64> {
        let ns = self.game.num_states;
        let next_values: Vec<f64> = (0..ns).map(|s2| self.value(step + 1, s2, next)).collect();
        (0..self.ja.len())
            .map(|j| {
                let p = self.game.transition(step, state, j);
                let future: f64 = p.iter().zip(&next_values).map(|(a, b)| a * b).sum();
                self.game.reward(step, state, j, self.agent) + future
            })
            .collect()
    }

    /// Reduces joint-action targets to either the on-path expectation or,
    /// for `IndexAware`, the per-own-action expectation vector.
    fn reduce(&self, targets: &[f64], probs: &dyn Fn(usize, usize) -> f64) -> Vec<f64> {
        let n = self.game.num_agents;
        let mut actions = vec![0; n];
        match self.mode {
            Mode::OnPath => {
                let mut total = 0.0;
                for (j, x) in targets.iter().enumerate() {
                    self.ja.decode_into(j, &mut actions);
                    let p: f64 = (0..n).map(|i| probs(i, actions[i])).product();
                    total += p * x;
                }
                vec![total]
            }
            Mode::IndexAware => {
                let mut out = vec![0.0; self.game.action_counts[self.agent]];
                for (j, x) in targets.iter().enumerate() {
                    self.ja.decode_into(j, &mut actions);
                    let p: f64 = (0..n)
                        .filter(|&i| i != self.agent)
                        .map(|i| probs(i, actions[i]))
                        .product();
                    out[actions[self.agent]] += p * x;
                }
                out
            }
        }
    }

    fn fallback_value(&mut self, step: usize, state: usize, k: usize) -> f64 {
        let targets = self.targets(step, state, k);
        let counts = self.game.action_counts.clone();
        let reduced = self.reduce(&targets, &|i, _| 1.0 / counts[i] as f64);
        reduced.into_iter().fold(f64::NEG_INFINITY, f64::max)
    }

    fn build_cell(&mut self, step: usize, state: usize) -> Vec<f64> {
        let store = self.store;
        let cell = store.cell(step, state);
        let horizon = self.game.horizon;
        let mut table = vec![0.0; cell.len() + 1];
        let width = match self.mode {
            Mode::OnPath => 1,
            Mode::IndexAware => self.game.action_counts[self.agent],
        };
        let mut running = vec![0.0; width];
        for (v, &episode) in cell.episodes.iter().enumerate() {
            let t = v + 1;
            let targets = self.targets(step, state, episode);
            let g = self.reduce(&targets, &|i, a| store.theta(i, step, state, v)[a]);
            let alpha = step_size(t, horizon);
            for (w, x) in running.iter_mut().zip(&g) {
                *w = (1.0 - alpha) * *w + alpha * x;
            }
            table[t] = running.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        }
        table
    }
}
