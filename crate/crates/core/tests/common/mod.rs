//! Independent oracles shared by the integration and acceptance tests.
#![allow(dead_code)]

use std::collections::BTreeMap;

use markov_cce::certified::{Start, TrajectoryStore};
use markov_cce::game::MarkovGame;

/// A deterministic deviation: an action, then a sub-policy per observation
/// `(own reward bits, next state)`.
#[derive(Debug, Clone)]
pub struct PolicyTree {
    pub action: usize,
    pub children: BTreeMap<(u64, usize), PolicyTree>,
}

fn observations(game: &MarkovGame, agent: usize, step: usize, state: usize, action: usize) -> Vec<(u64, usize)> {
    let ja = game.joint_actions();
    let mut out = Vec::new();
    for j in 0..ja.len() {
        if ja.component(j, agent) != action {
            continue;
        }
        let r = game.reward(step, state, j, agent).to_bits();
        for s2 in 0..game.num_states {
            if !out.contains(&(r, s2)) {
                out.push((r, s2));
            }
        }
    }
    out.sort_unstable();
    out
}

/// Every deterministic policy of `agent` from `(step, state)` onward.
pub fn all_policies(game: &MarkovGame, agent: usize, step: usize, state: usize) -> Vec<PolicyTree> {
    let mut out = Vec::new();
    for action in 0..game.action_counts[agent] {
        if step + 1 == game.horizon {
            out.push(PolicyTree {
                action,
                children: BTreeMap::new(),
            });
            continue;
        }
        let obs = observations(game, agent, step, state, action);
        let options: Vec<Vec<PolicyTree>> = obs.iter().map(|&(_, s2)| all_policies(game, agent, step + 1, s2)).collect();
        let mut combos: Vec<BTreeMap<(u64, usize), PolicyTree>> = vec![BTreeMap::new()];
        for (key, opts) in obs.iter().zip(&options) {
            let mut next = Vec::with_capacity(combos.len() * opts.len());
            for c in &combos {
                for o in opts {
                    let mut c2 = c.clone();
                    c2.insert(*key, o.clone());
                    next.push(c2);
                }
            }
            combos = next;
        }
        out.extend(combos.into_iter().map(|children| PolicyTree { action, children }));
    }
    out
}

/// `α_t^i` straight from the product definition.
pub fn alpha(t: usize, i: usize, horizon: usize) -> f64 {
    let a = |j: usize| (horizon as f64 + 1.0) / (horizon as f64 + j as f64);
    a(i) * (i + 1..=t).map(|j| 1.0 - a(j)).product::<f64>()
}

/// Exact expected return of `agent` following `tree` while the others play
/// the correlated policy from pointer `k`.
fn evaluate(game: &MarkovGame, store: &TrajectoryStore, agent: usize, step: usize, state: usize, k: usize, tree: &PolicyTree) -> f64 {
    if step == game.horizon {
        return 0.0;
    }
    let ja = game.joint_actions();
    let cell = store.cell(step, state);
    let t = cell.episodes.iter().filter(|&&e| e < k).count();
    // (probability, next pointer, opponent strategies)
    let mut branches: Vec<(f64, usize, Vec<Vec<f64>>)> = Vec::new();
    if t == 0 {
        let uniform = game.action_counts.iter().map(|&a| vec![1.0 / a as f64; a]).collect();
        branches.push((1.0, k, uniform));
    } else {
        for i in 1..=t {
            let strategies = (0..game.num_agents).map(|ag| store.theta(ag, step, state, i - 1).to_vec()).collect();
            branches.push((alpha(t, i, game.horizon), cell.episodes[i - 1], strategies));
        }
    }
    let mut total = 0.0;
    for (w, next_k, strategies) in &branches {
        for j in 0..ja.len() {
            let acts = ja.decode(j);
            if acts[agent] != tree.action {
                continue;
            }
            let p: f64 = (0..game.num_agents).filter(|&i| i != agent).map(|i| strategies[i][acts[i]]).product();
            let r = game.reward(step, state, j, agent);
            total += w * p * r;
            if step + 1 == game.horizon {
                continue;
            }
            for (s2, &pt) in game.transition(step, state, j).iter().enumerate() {
                if pt > 0.0 {
                    let child = &tree.children[&(r.to_bits(), s2)];
                    total += w * p * pt * evaluate(game, store, agent, step + 1, s2, *next_k, child);
                }
            }
        }
    }
    total
}

/// Best value over all deterministic history-dependent deviations.
pub fn brute_force_best_response(game: &MarkovGame, store: &TrajectoryStore, agent: usize, start: Start) -> f64 {
    let starts: Vec<(usize, f64)> = match start {
        Start::Uniform => (1..=store.episodes).map(|k| (k, 1.0 / store.episodes as f64)).collect(),
        Start::At(k) => vec![(k, 1.0)],
    };
    all_policies(game, agent, 0, game.initial_state)
        .iter()
        .map(|tree| {
            starts
                .iter()
                .map(|&(k, w)| w * evaluate(game, store, agent, 0, game.initial_state, k, tree))
                .sum::<f64>()
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

/// A store for a 2-agent, 2-step game with `K` episodes of random strategies
/// along random state paths.
pub fn random_store(game: &MarkovGame, episodes: usize, seed: u64) -> TrajectoryStore {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut store = TrajectoryStore::empty(game.horizon, game.num_states, game.action_counts.clone());
    for k in 1..=episodes {
        let mut s = game.initial_state;
        for step in 0..game.horizon {
            let thetas: Vec<Vec<f64>> = game
                .action_counts
                .iter()
                .map(|&a| {
                    let mut v: Vec<f64> = (0..a).map(|_| rng.gen::<f64>() + 0.05).collect();
                    let total: f64 = v.iter().sum();
                    v.iter_mut().for_each(|x| *x /= total);
                    v
                })
                .collect();
            let refs: Vec<&[f64]> = thetas.iter().map(Vec::as_slice).collect();
            store.push(k, step, s, &refs).unwrap();
            s = rng.gen_range(0..game.num_states);
        }
    }
    store
}
