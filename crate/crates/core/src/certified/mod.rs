//! The certified correlated policy and its exact evaluators.
//!
//! A run's per-visit strategies are frozen in a [`TrajectoryStore`]. The
//! correlated policy draws an episode pointer `k` uniformly from `[K]`; at
//! each step it looks up the `t` visits to the current state before episode
//! `k`, draws visit `i` with probability `α_t^i` from a seed shared by all
//! agents, plays the strategies recorded at that visit and moves the pointer
//! to the visit's episode. With no earlier visit every agent plays uniformly
//! and the pointer stays.

mod dp;
mod exact;
mod store;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub use store::{CellVisits, TrajectoryStore};

use crate::bandit::schedule::step_size;
use crate::error::{Error, Result};
use crate::game::{sample_episode, Actor, EpisodeRecord, MarkovGame, Observation, RewardModel, SIMPLEX_TOL};
use crate::simplex::{compensated_sum, is_distribution, sample_index};
use dp::{Mode, PointerDp};
use exact::ExactOracle;

/// A frozen store plus the seed every agent uses for pointer and visit draws.
#[derive(Debug, Clone, Copy)]
pub struct CertifiedPolicy<'a> {
    pub store: &'a TrajectoryStore,
    pub shared_seed: u64,
}

impl<'a> CertifiedPolicy<'a> {
    pub fn new(store: &'a TrajectoryStore, shared_seed: u64) -> Self {
        CertifiedPolicy { store, shared_seed }
    }

    /// One executor per agent; `action_seeds[i]` drives agent `i`'s own draws.
    pub fn actors(&self, action_seeds: &[u64]) -> Vec<CertifiedActor<'a>> {
        action_seeds
            .iter()
            .enumerate()
            .map(|(agent, &seed)| CertifiedActor {
                store: self.store,
                agent,
                shared: ChaCha8Rng::seed_from_u64(self.shared_seed),
                own: ChaCha8Rng::seed_from_u64(seed),
                pointer: 0,
                draws: Vec::new(),
            })
            .collect()
    }
}

/// Draws `i ∈ [t]` with probability `α_t^i` by walking down from `t` and
/// stopping at `i` with probability `α_i`.
pub fn sample_visit<R: Rng + ?Sized>(t: usize, horizon: usize, rng: &mut R) -> usize {
    for i in (2..=t).rev() {
        if rng.gen::<f64>() < step_size(i, horizon) {
            return i;
        }
    }
    1
}

/// One agent's side of the correlated policy. Agents built from the same
/// [`CertifiedPolicy`] make identical pointer and visit draws.
#[derive(Debug, Clone)]
pub struct CertifiedActor<'a> {
    store: &'a TrajectoryStore,
    agent: usize,
    shared: ChaCha8Rng,
    own: ChaCha8Rng,
    pointer: usize,
    /// Per step played: the episode pointer drawn at the start of the
    /// episode (on step 0) and the 1-based visit index used, `None` for the
    /// uniform fallback.
    pub draws: Vec<(usize, Option<usize>)>,
}

impl Actor for CertifiedActor<'_> {
    fn act(&mut self, step: usize, state: usize) -> usize {
        let store = self.store;
        if step == 0 {
            self.pointer = self.shared.gen_range(1..=store.episodes);
        }
        let entry_pointer = self.pointer;
        let t = store.visits_before(step, state, self.pointer);
        if t == 0 {
            self.draws.push((entry_pointer, None));
            return self.own.gen_range(0..store.action_counts[self.agent]);
        }
        let m = sample_visit(t, store.horizon, &mut self.shared);
        self.pointer = store.cell(step, state).episodes[m - 1];
        self.draws.push((entry_pointer, Some(m)));
        sample_index(store.theta(self.agent, step, state, m - 1), &mut self.own)
    }

    fn observe(&mut self, _: &Observation) -> Result<()> {
        Ok(())
    }
}

/// Plays one episode of the correlated policy. `rng` drives the environment.
pub fn execute_certified<R: Rng + ?Sized>(
    game: &MarkovGame,
    actors: &mut [CertifiedActor<'_>],
    rng: &mut R,
) -> Result<EpisodeRecord> {
    let store = actors.first().map(|a| a.store).ok_or(Error::EmptyStore)?;
    store.check_against(game)?;
    let mut refs: Vec<&mut dyn Actor> = actors.iter_mut().map(|a| a as &mut dyn Actor).collect();
    sample_episode(game, &mut refs, RewardModel::Deterministic, rng)
}

fn check(game: &MarkovGame, store: &TrajectoryStore, agent: usize) -> Result<()> {
    if agent >= game.num_agents {
        return Err(Error::AgentOutOfRange {
            agent,
            num_agents: game.num_agents,
        });
    }
    store.check_against(game)
}

fn mean_over_episodes(per_k: &[f64], episodes: usize) -> f64 {
    compensated_sum(&per_k[..episodes]) / episodes as f64
}

/// `V_{k,1}(s_1)` of the correlated policy for every pointer `k ∈ [1, K+1]`
/// (entry `k − 1`). Pointer `K + 1` uses every recorded visit.
pub fn certified_values_per_k(game: &MarkovGame, store: &TrajectoryStore, agent: usize) -> Result<Vec<f64>> {
    check(game, store, agent)?;
    let mut dp = PointerDp::new(game, store, agent, Mode::OnPath);
    Ok((1..=store.episodes + 1).map(|k| dp.value(0, game.initial_state, k)).collect())
}

/// The correlated policy's value for `agent` at the initial state.
pub fn value_of_certified(game: &MarkovGame, store: &TrajectoryStore, agent: usize) -> Result<f64> {
    let per_k = certified_values_per_k(game, store, agent)?;
    Ok(mean_over_episodes(&per_k, store.episodes))
}

/// Where the episode pointer starts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Start {
    /// Uniform on `[1, K]`.
    Uniform,
    /// Fixed at `k ∈ [1, K+1]`.
    At(usize),
}

fn check_start(store: &TrajectoryStore, start: Start) -> Result<()> {
    match start {
        Start::At(k) if k == 0 || k > store.episodes + 1 => Err(Error::Config(format!(
            "pointer {k} outside [1, {}]",
            store.episodes + 1
        ))),
        _ => Ok(()),
    }
}

/// A best-response value against the other agents' side of the correlated policy.
pub trait BestResponseOracle: Send + Sync {
    fn name(&self) -> &'static str;

    fn value(&self, game: &MarkovGame, store: &TrajectoryStore, agent: usize, start: Start) -> Result<f64>;
}

/// Deviator limited to its own observations (states, own actions, own
/// rewards); optimal over all history-dependent deviations.
pub struct ObservationLimited;

impl BestResponseOracle for ObservationLimited {
    fn name(&self) -> &'static str {
        "exact"
    }

    fn value(&self, game: &MarkovGame, store: &TrajectoryStore, agent: usize, start: Start) -> Result<f64> {
        check(game, store, agent)?;
        check_start(store, start)?;
        let belief = match start {
            Start::Uniform => {
                let m = 1.0 / store.episodes as f64;
                (1..=store.episodes).map(|k| (k, m)).collect()
            }
            Start::At(k) => vec![(k, 1.0)],
        };
        Ok(ExactOracle::new(game, store, agent).value(0, game.initial_state, &belief))
    }
}

/// Deviator that knows the episode pointer at every step (but not the visit
/// sampled there). An upper bound on [`ObservationLimited`].
pub struct IndexAware;

impl BestResponseOracle for IndexAware {
    fn name(&self) -> &'static str {
        "index-aware"
    }

    fn value(&self, game: &MarkovGame, store: &TrajectoryStore, agent: usize, start: Start) -> Result<f64> {
        check_start(store, start)?;
        let per_k = index_aware_values_per_k(game, store, agent)?;
        Ok(match start {
            Start::Uniform => mean_over_episodes(&per_k, store.episodes),
            Start::At(k) => per_k[k - 1],
        })
    }
}

/// The pointer-aware best-response value `V^⋆_{k,1}(s_1)` for every `k ∈ [1, K+1]`.
pub fn index_aware_values_per_k(game: &MarkovGame, store: &TrajectoryStore, agent: usize) -> Result<Vec<f64>> {
    check(game, store, agent)?;
    let mut dp = PointerDp::new(game, store, agent, Mode::IndexAware);
    Ok((1..=store.episodes + 1).map(|k| dp.value(0, game.initial_state, k)).collect())
}

pub struct OracleEntry {
    pub name: &'static str,
    pub summary: &'static str,
    build: fn() -> Box<dyn BestResponseOracle>,
}

static ORACLES: &[OracleEntry] = &[
    OracleEntry {
        name: "exact",
        summary: "deviator sees states, own actions and own rewards",
        build: || Box::new(ObservationLimited),
    },
    OracleEntry {
        name: "index-aware",
        summary: "deviator also knows the episode pointer (upper bound)",
        build: || Box::new(IndexAware),
    },
];

pub fn oracles() -> &'static [OracleEntry] {
    ORACLES
}

pub fn build_oracle(name: &str) -> Result<Box<dyn BestResponseOracle>> {
    ORACLES
        .iter()
        .find(|e| e.name == name)
        .map(|e| (e.build)())
        .ok_or_else(|| Error::UnknownName {
            kind: "best-response oracle",
            name: name.to_string(),
            available: ORACLES.iter().map(|e| e.name).collect::<Vec<_>>().join(", "),
        })
}

/// Per-agent values, best responses and their differences.
#[derive(Debug, Clone, PartialEq)]
pub struct GapReport {
    pub values: Vec<f64>,
    pub best_responses: Vec<f64>,
    pub gaps: Vec<f64>,
}

impl GapReport {
    pub fn max_gap(&self) -> f64 {
        self.gaps.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

pub fn gap_report(
    game: &MarkovGame,
    store: &TrajectoryStore,
    oracle: &dyn BestResponseOracle,
    start: Start,
) -> Result<GapReport> {
    let mut values = Vec::with_capacity(game.num_agents);
    let mut best_responses = Vec::with_capacity(game.num_agents);
    for agent in 0..game.num_agents {
        let per_k = certified_values_per_k(game, store, agent)?;
        check_start(store, start)?;
        values.push(match start {
            Start::Uniform => mean_over_episodes(&per_k, store.episodes),
            Start::At(k) => per_k[k - 1],
        });
        best_responses.push(oracle.value(game, store, agent, start)?);
    }
    let gaps = best_responses.iter().zip(&values).map(|(b, v)| b - v).collect();
    Ok(GapReport {
        values,
        best_responses,
        gaps,
    })
}

/// Per-agent gain from the best observation-limited deviation.
pub fn cce_gap(game: &MarkovGame, store: &TrajectoryStore) -> Result<Vec<f64>> {
    Ok(gap_report(game, store, &ObservationLimited, Start::Uniform)?.gaps)
}

/// As [`cce_gap`] with the pointer fixed at `k`.
pub fn cce_gap_at(game: &MarkovGame, store: &TrajectoryStore, k: usize) -> Result<Vec<f64>> {
    Ok(gap_report(game, store, &ObservationLimited, Start::At(k))?.gaps)
}

/// Direct check of a joint-action distribution in a single-stage game:
/// `max_{a^i} E[r^i(a^i, a^{-i})] − E[r^i(a)]` per agent.
pub fn verify_cce_distribution(game: &MarkovGame, dist: &[f64]) -> Result<Vec<f64>> {
    if game.horizon != 1 || game.num_states != 1 {
        return Err(Error::Dimension(format!(
            "expected a single-stage game, got H={} S={}",
            game.horizon, game.num_states
        )));
    }
    let ja = game.joint_actions();
    if dist.len() != ja.len() || !is_distribution(dist, SIMPLEX_TOL) {
        return Err(Error::NotADistribution(format!("{dist:?}")));
    }
    let mut actions = vec![0; game.num_agents];
    let mut gaps = Vec::with_capacity(game.num_agents);
    for agent in 0..game.num_agents {
        let mut on_path = Vec::with_capacity(ja.len());
        let mut deviations = vec![Vec::with_capacity(ja.len()); game.action_counts[agent]];
        for (j, &p) in dist.iter().enumerate() {
            on_path.push(p * game.reward(0, 0, j, agent));
            ja.decode_into(j, &mut actions);
            for (dev, out) in deviations.iter_mut().enumerate() {
                let mut moved = actions.clone();
                moved[agent] = dev;
                out.push(p * game.reward(0, 0, ja.encode(&moved), agent));
            }
        }
        let best = deviations
            .iter()
            .map(|d| compensated_sum(d))
            .fold(f64::NEG_INFINITY, f64::max);
        gaps.push(best - compensated_sum(&on_path));
    }
    Ok(gaps)
}
