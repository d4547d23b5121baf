//! Exact dynamic-programming evaluators used as oracles.

use super::{MarkovGame, SIMPLEX_TOL};
use crate::error::{Error, Result};
use crate::simplex::{is_distribution, uniform};

/// Ties within this margin go to the lowest action index.
const ARGMAX_TIE: f64 = 1e-12;

/// A Markov policy for one agent: `table[step][state]` is a distribution
/// over that agent's actions.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkovPolicy {
    pub owner: usize,
    pub table: Vec<Vec<Vec<f64>>>,
}

impl MarkovPolicy {
    pub fn uniform(game: &MarkovGame, owner: usize) -> Self {
        let a = game.action_counts[owner];
        MarkovPolicy {
            owner,
            table: vec![vec![uniform(a); game.num_states]; game.horizon],
        }
    }

    /// Same mixed strategy at every `(step, state)`.
    pub fn stationary(game: &MarkovGame, owner: usize, strategy: &[f64]) -> Self {
        MarkovPolicy {
            owner,
            table: vec![vec![strategy.to_vec(); game.num_states]; game.horizon],
        }
    }

    pub fn deterministic(owner: usize, choices: &[Vec<usize>], num_actions: usize) -> Self {
        let table = choices
            .iter()
            .map(|per_state| {
                per_state
                    .iter()
                    .map(|&a| {
                        let mut p = vec![0.0; num_actions];
                        p[a] = 1.0;
                        p
                    })
                    .collect()
            })
            .collect();
        MarkovPolicy { owner, table }
    }

    #[inline]
    pub fn prob(&self, step: usize, state: usize, action: usize) -> f64 {
        self.table[step][state][action]
    }

    fn check(&self, game: &MarkovGame) -> Result<()> {
        let a = *game.action_counts.get(self.owner).ok_or(Error::AgentOutOfRange {
            agent: self.owner,
            num_agents: game.num_agents,
        })?;
        if self.table.len() != game.horizon {
            return Err(Error::Dimension(format!(
                "policy of agent {} has {} steps, game has {}",
                self.owner,
                self.table.len(),
                game.horizon
            )));
        }
        for (step, per_state) in self.table.iter().enumerate() {
            if per_state.len() != game.num_states {
                return Err(Error::Dimension(format!(
                    "policy of agent {} at h={} covers {} states, game has {}",
                    self.owner,
                    step + 1,
                    per_state.len(),
                    game.num_states
                )));
            }
            for (state, p) in per_state.iter().enumerate() {
                if p.len() != a {
                    return Err(Error::Dimension(format!(
                        "policy of agent {} at (h={}, s={state}) has {} entries, agent has {a} actions",
                        self.owner,
                        step + 1,
                        p.len()
                    )));
                }
                if !is_distribution(p, SIMPLEX_TOL) {
                    return Err(Error::NotADistribution(format!(
                        "policy of agent {} at (h={}, s={state})",
                        self.owner,
                        step + 1
                    )));
                }
            }
        }
        Ok(())
    }
}

/// `values[step][state]` for `step ∈ [0, H]`; the row at `H` is zero.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueTable {
    pub values: Vec<Vec<f64>>,
}

impl ValueTable {
    fn zeros(game: &MarkovGame) -> Self {
        ValueTable {
            values: vec![vec![0.0; game.num_states]; game.horizon + 1],
        }
    }

    #[inline]
    pub fn get(&self, step: usize, state: usize) -> f64 {
        self.values[step][state]
    }

    /// Value at step 0 of `state`.
    pub fn initial(&self, state: usize) -> f64 {
        self.values[0][state]
    }
}

fn check_profile(game: &MarkovGame, policies: &[MarkovPolicy]) -> Result<()> {
    if policies.len() != game.num_agents {
        return Err(Error::Dimension(format!(
            "{} policies for a {}-agent game",
            policies.len(),
            game.num_agents
        )));
    }
    for (i, p) in policies.iter().enumerate() {
        if p.owner != i {
            return Err(Error::Dimension(format!(
                "policy in slot {i} belongs to agent {}",
                p.owner
            )));
        }
        p.check(game)?;
    }
    Ok(())
}

#[inline]
fn expected_next(row: &[f64], next: &[f64]) -> f64 {
    row.iter().zip(next).map(|(p, v)| p * v).sum()
}

/// Exact per-agent values of a product of Markov policies:
/// `Q_h = r_h + P_h V_{h+1}`, `V_h = E_{a ~ π_h} Q_h`.
pub fn evaluate_joint_policy(game: &MarkovGame, policies: &[MarkovPolicy]) -> Result<Vec<ValueTable>> {
    check_profile(game, policies)?;
    let ja = game.joint_actions();
    let n = game.num_agents;
    let mut tables = vec![ValueTable::zeros(game); n];
    let mut actions = vec![0; n];
    for step in (0..game.horizon).rev() {
        for state in 0..game.num_states {
            let mut acc = vec![0.0; n];
            for joint in 0..ja.len() {
                ja.decode_into(joint, &mut actions);
                let prob: f64 = policies
                    .iter()
                    .zip(&actions)
                    .map(|(p, &a)| p.prob(step, state, a))
                    .product();
                if prob == 0.0 {
                    continue;
                }
                let row = game.transition(step, state, joint);
                for (i, slot) in acc.iter_mut().enumerate() {
                    let q = game.reward(step, state, joint, i)
                        + expected_next(row, &tables[i].values[step + 1]);
                    *slot += prob * q;
                }
            }
            for (i, v) in acc.into_iter().enumerate() {
                tables[i].values[step][state] = v;
            }
        }
    }
    Ok(tables)
}

/// Deterministic Markov best response of `agent` to the other entries of
/// `policies` (the agent's own entry is ignored).
pub fn best_response(
    game: &MarkovGame,
    agent: usize,
    policies: &[MarkovPolicy],
) -> Result<(MarkovPolicy, ValueTable)> {
    if agent >= game.num_agents {
        return Err(Error::AgentOutOfRange {
            agent,
            num_agents: game.num_agents,
        });
    }
    check_profile(game, policies)?;
    let ja = game.joint_actions();
    let own = game.action_counts[agent];
    let mut values = ValueTable::zeros(game);
    let mut choices = vec![vec![0; game.num_states]; game.horizon];
    let mut actions = vec![0; game.num_agents];
    for step in (0..game.horizon).rev() {
        for state in 0..game.num_states {
            let mut q = vec![0.0; own];
            for joint in 0..ja.len() {
                ja.decode_into(joint, &mut actions);
                let weight: f64 = policies
                    .iter()
                    .zip(&actions)
                    .enumerate()
                    .filter(|(i, _)| *i != agent)
                    .map(|(_, (p, &a))| p.prob(step, state, a))
                    .product();
                if weight == 0.0 {
                    continue;
                }
                let row = game.transition(step, state, joint);
                q[actions[agent]] += weight
                    * (game.reward(step, state, joint, agent)
                        + expected_next(row, &values.values[step + 1]));
            }
            let best = argmax_lowest(&q);
            choices[step][state] = best;
            values.values[step][state] = q[best];
        }
    }
    Ok((MarkovPolicy::deterministic(agent, &choices, own), values))
}

pub(crate) fn argmax_lowest(q: &[f64]) -> usize {
    let max = q.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    q.iter().position(|&v| v >= max - ARGMAX_TIE).unwrap_or(0)
}

/// `gap_i = V^{†, π^{-i}}_1(s_1) - V^{π}_1(s_1)` for each agent.
pub fn ne_gap(game: &MarkovGame, policies: &[MarkovPolicy]) -> Result<Vec<f64>> {
    let on_path = evaluate_joint_policy(game, policies)?;
    (0..game.num_agents)
        .map(|i| {
            let (_, br) = best_response(game, i, policies)?;
            Ok(br.initial(game.initial_state) - on_path[i].initial(game.initial_state))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::tests::hawk_dove;

    fn mixed(game: &MarkovGame, p: [f64; 2], q: [f64; 2]) -> Vec<MarkovPolicy> {
        vec![
            MarkovPolicy::stationary(game, 0, &p),
            MarkovPolicy::stationary(game, 1, &q),
        ]
    }

    #[test]
    fn hawk_dove_mixed_ne_value() {
        let g = hawk_dove();
        let v = evaluate_joint_policy(&g, &mixed(&g, [0.5, 0.5], [0.5, 0.5])).unwrap();
        // (4 + 1 + 5 + 0) / 4 = 2.5 in unscaled units.
        assert!((v[0].initial(0) * 5.0 - 2.5).abs() < 1e-12);
        assert!((v[1].initial(0) * 5.0 - 2.5).abs() < 1e-12);
        assert_eq!(v[0].get(1, 0), 0.0);
    }

    #[test]
    fn hawk_dove_pure_pair_value() {
        let g = hawk_dove();
        let v = evaluate_joint_policy(&g, &mixed(&g, [0.0, 1.0], [1.0, 0.0])).unwrap();
        assert!((v[0].initial(0) - 1.0).abs() < 1e-12);
        assert!((v[1].initial(0) - 0.2).abs() < 1e-12);
    }

    #[test]
    fn best_response_against_two_thirds_hawk() {
        let g = hawk_dove();
        let profile = mixed(&g, [0.5, 0.5], [2.0 / 3.0, 1.0 / 3.0]);
        let (pi, v) = best_response(&g, 0, &profile).unwrap();
        // a_1: 4*2/3 + 1/3 = 3, a_2: 5*2/3 = 10/3.
        assert!((v.initial(0) * 5.0 - 10.0 / 3.0).abs() < 1e-12);
        assert_eq!(pi.table[0][0], vec![0.0, 1.0]);
    }

    #[test]
    fn ne_gaps_on_hawk_dove() {
        let g = hawk_dove();
        let gaps = ne_gap(&g, &mixed(&g, [0.5, 0.5], [0.5, 0.5])).unwrap();
        assert!(gaps.iter().all(|x| x.abs() < 1e-12));
        let gaps = ne_gap(&g, &mixed(&g, [1.0, 0.0], [1.0, 0.0])).unwrap();
        // Row deviates from a_1 to a_2: 5 vs 4.
        assert!((gaps[0] * 5.0 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_action_agent_best_response_equals_evaluation() {
        let g = MarkovGame::normal_form(vec![1, 2], vec![vec![0.3, 0.1], vec![0.9, 0.4]]).unwrap();
        let profile = vec![
            MarkovPolicy::uniform(&g, 0),
            MarkovPolicy::stationary(&g, 1, &[0.25, 0.75]),
        ];
        let v = evaluate_joint_policy(&g, &profile).unwrap();
        let (_, br) = best_response(&g, 0, &profile).unwrap();
        assert!((v[0].initial(0) - br.initial(0)).abs() < 1e-15);
    }

    #[test]
    fn bad_agent_and_dimension_errors() {
        let g = hawk_dove();
        let profile = mixed(&g, [0.5, 0.5], [0.5, 0.5]);
        assert!(matches!(
            best_response(&g, 2, &profile),
            Err(Error::AgentOutOfRange { .. })
        ));
        let mut short = profile.clone();
        short[1].table[0][0] = vec![1.0];
        assert!(matches!(
            evaluate_joint_policy(&g, &short),
            Err(Error::Dimension(_))
        ));
    }
}
