//! Best response of a deviator who sees only states, its own actions and its
//! own rewards.
//!
//! The opponents' play at a step is fixed by the hidden episode pointer, so
//! the deviator's decision problem is a POMDP whose belief is a mass vector
//! over pointers. The recursion expands the deviator's observation tree:
//! at each node it takes the best own action against the current
//! (unnormalized) pointer mass and splits the mass by what it observes next.
//! Values are positively homogeneous in the mass, so no normalization is needed.

use std::collections::BTreeMap;

use super::store::TrajectoryStore;
use crate::bandit::schedule::step_size;
use crate::game::{JointActions, MarkovGame};

/// Pointer mass: `(k, mass)` pairs sorted by `k`.
pub(crate) type Belief = Vec<(usize, f64)>;

pub(crate) struct ExactOracle<'a> {
    game: &'a MarkovGame,
    store: &'a TrajectoryStore,
    agent: usize,
    ja: JointActions,
}

/// Child observation: next state and the bit pattern of the own reward.
type ObsKey = (usize, u64);

impl<'a> ExactOracle<'a> {
    pub(crate) fn new(game: &'a MarkovGame, store: &'a TrajectoryStore, agent: usize) -> Self {
        ExactOracle {
            game,
            store,
            agent,
            ja: game.joint_actions(),
        }
    }

    pub(crate) fn value(&self, step: usize, state: usize, belief: &Belief) -> f64 {
        if step == self.game.horizon || belief.is_empty() {
            return 0.0;
        }
        let cell = self.store.cell(step, state);
        let n = cell.len();

        // Mass per prefix length, then per visit via the backward identity
        // Σ_{t≥i} c_t α_t^i = α_i Q_i with Q_i = c_i + (1 − α_{i+1}) Q_{i+1}.
        let mut by_prefix = vec![0.0; n + 1];
        let mut fallback: Belief = Vec::new();
        for &(k, m) in belief {
            match cell.count_before(k) {
                0 => fallback.push((k, m)),
                t => by_prefix[t] += m,
            }
        }
        let horizon = self.game.horizon;
        let mut visit_mass = vec![0.0; n + 1];
        let mut q = 0.0;
        for i in (1..=n).rev() {
            q = by_prefix[i] + (1.0 - step_size(i + 1, horizon)) * q;
            visit_mass[i] = step_size(i, horizon) * q;
        }

        let last = step + 1 == horizon;
        let own = self.game.action_counts[self.agent];
        let agents = self.game.num_agents;
        let mut actions = vec![0; agents];
        let mut best = f64::NEG_INFINITY;
        for a in 0..own {
            let mut immediate = 0.0;
            let mut children: BTreeMap<ObsKey, BTreeMap<usize, f64>> = BTreeMap::new();
            let mut spread = |mass: f64, next_k: usize, prob: &dyn Fn(usize, usize) -> f64| {
                for j in 0..self.ja.len() {
                    self.ja.decode_into(j, &mut actions);
                    if actions[self.agent] != a {
                        continue;
                    }
                    let p: f64 = (0..agents)
                        .filter(|&i| i != self.agent)
                        .map(|i| prob(i, actions[i]))
                        .product();
                    let w = mass * p;
                    if w == 0.0 {
                        continue;
                    }
                    let r = self.game.reward(step, state, j, self.agent);
                    immediate += w * r;
                    if last {
                        continue;
                    }
                    for (s2, &pt) in self.game.transition(step, state, j).iter().enumerate() {
                        if pt > 0.0 {
                            *children
                                .entry((s2, r.to_bits()))
                                .or_default()
                                .entry(next_k)
                                .or_insert(0.0) += w * pt;
                        }
                    }
                }
            };
            for (v, &episode) in cell.episodes.iter().enumerate() {
                let m = visit_mass[v + 1];
                if m > 0.0 {
                    spread(m, episode, &|i, b| self.store.theta(i, step, state, v)[b]);
                }
            }
            for &(k, m) in &fallback {
                spread(m, k, &|i, _| 1.0 / self.game.action_counts[i] as f64);
            }
            let mut total = immediate;
            for ((s2, _), next) in children {
                let next: Belief = next.into_iter().collect();
                total += self.value(step + 1, s2, &next);
            }
            best = best.max(total);
        }
        best
    }
}
