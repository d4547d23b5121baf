use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;

use super::config::{resolve_game, ExperimentConfig};
use super::metrics::{write_metrics, write_optimism, write_timing, MetricRow, OptimismRow, TimingRow};
use super::seeds::{stream, Role};
use crate::bandit::schedule::iota;
use crate::bandit::ScheduleParams;
use crate::certified::{build_oracle, gap_report, index_aware_values_per_k, BestResponseOracle, Start, TrajectoryStore};
use crate::error::Result;
use crate::game::{sample_episode, Actor, MarkovGame, RewardModel};
use crate::vlearning::{AgentState, VLearner};

/// Schedule inputs shared by all agents of a run: `ι` uses the largest
/// action count and `T = K·H`.
pub fn agent_params(game: &MarkovGame, cfg: &ExperimentConfig) -> Result<ScheduleParams> {
    let log_factor = iota(
        game.num_states,
        game.max_actions(),
        cfg.episodes * game.horizon,
        cfg.confidence,
    );
    ScheduleParams::new(game.horizon, cfg.bonus_constant, log_factor)
}

pub fn build_learners(game: &MarkovGame, cfg: &ExperimentConfig, replicate: usize) -> Result<Vec<VLearner>> {
    let params = agent_params(game, cfg)?;
    game.action_counts
        .iter()
        .enumerate()
        .map(|(i, &a)| {
            let state = AgentState::new(a, game.num_states, params)?;
            Ok(VLearner::new(state, stream(cfg.seed, replicate, Role::Agent(i))))
        })
        .collect()
}

/// Everything one replicate produced.
#[derive(Debug, Clone)]
pub struct ReplicateOutcome {
    pub replicate: usize,
    pub metrics: Vec<MetricRow>,
    pub timing: Vec<TimingRow>,
    pub optimism: Vec<OptimismRow>,
    pub store: TrajectoryStore,
}

fn store_upto(game: &MarkovGame, learners: &[VLearner], k: usize) -> Result<TrajectoryStore> {
    let snaps: Vec<&[_]> = learners.iter().map(|l| l.snapshots()).collect();
    TrajectoryStore::from_snapshots(game.horizon, game.num_states, game.action_counts.clone(), &snaps, k)
}

/// Gaps of the correlated policy built from a store.
pub fn evaluate_checkpoint(
    game: &MarkovGame,
    store: &TrajectoryStore,
    oracle: &dyn BestResponseOracle,
    replicate: usize,
) -> Result<MetricRow> {
    let report = gap_report(game, store, oracle, Start::Uniform)?;
    Ok(MetricRow {
        replicate,
        checkpoint: store.episodes,
        gaps: report.gaps,
        values: report.values,
    })
}

/// Per agent, compares `V̄_1^k(s_1)` with the pointer-aware best response
/// to the others at pointer `k`, for every episode `k`.
pub fn optimism_rows(
    game: &MarkovGame,
    store: &TrajectoryStore,
    learners: &[VLearner],
    replicate: usize,
) -> Result<Vec<OptimismRow>> {
    let mut rows = Vec::with_capacity(learners.len());
    for (agent, learner) in learners.iter().enumerate() {
        let best = index_aware_values_per_k(game, store, agent)?;
        let mut violations = 0;
        let mut min_margin = f64::INFINITY;
        for (optimistic, br) in learner.initial_values().iter().zip(&best) {
            let margin = optimistic - br;
            min_margin = min_margin.min(margin);
            if margin < -1e-9 {
                violations += 1;
            }
        }
        rows.push(OptimismRow {
            replicate,
            agent,
            episodes: learner.initial_values().len(),
            violations,
            min_margin,
        });
    }
    Ok(rows)
}

pub fn run_replicate(game: &MarkovGame, cfg: &ExperimentConfig, replicate: usize) -> Result<ReplicateOutcome> {
    let oracle = build_oracle(&cfg.oracle)?;
    let mut learners = build_learners(game, cfg, replicate)?;
    let mut env = stream(cfg.seed, replicate, Role::Environment);
    let model = if cfg.bernoulli_rewards {
        RewardModel::Bernoulli
    } else {
        RewardModel::Deterministic
    };
    let checkpoints = cfg.checkpoint_list();
    let mut next = checkpoints.iter().peekable();
    let mut metrics = Vec::with_capacity(checkpoints.len());
    let mut timing = Vec::with_capacity(checkpoints.len());
    let mut clock = Instant::now();
    for k in 1..=cfg.episodes {
        let mut actors: Vec<&mut dyn Actor> = learners.iter_mut().map(|l| l as &mut dyn Actor).collect();
        sample_episode(game, &mut actors, model, &mut env)?;
        if next.peek() == Some(&&k) {
            next.next();
            let train_seconds = clock.elapsed().as_secs_f64();
            let started = Instant::now();
            let store = store_upto(game, &learners, k)?;
            metrics.push(evaluate_checkpoint(game, &store, oracle.as_ref(), replicate)?);
            timing.push(TimingRow {
                replicate,
                checkpoint: k,
                train_seconds,
                eval_seconds: started.elapsed().as_secs_f64(),
            });
            clock = Instant::now();
        }
    }
    let store = store_upto(game, &learners, cfg.episodes)?;
    let optimism = optimism_rows(game, &store, &learners, replicate)?;
    Ok(ReplicateOutcome {
        replicate,
        metrics,
        timing,
        optimism,
        store,
    })
}

pub fn trajectory_path(out_dir: &Path, replicate: usize, agent: usize) -> PathBuf {
    out_dir
        .join(format!("replicate_{replicate}"))
        .join(format!("trajectory_agent{agent}.csv"))
}

/// Summary of a finished run.
#[derive(Debug, Clone)]
pub struct SelfplayReport {
    pub game: MarkovGame,
    pub metrics: Vec<MetricRow>,
    pub optimism: Vec<OptimismRow>,
    pub out_dir: PathBuf,
}

/// Runs every replicate (in parallel) and writes `game.json`,
/// `metrics.csv`, `timing.csv`, `optimism.csv` and, if enabled,
/// `replicate_<r>/trajectory_agent<i>.csv`.
pub fn run_selfplay(cfg: &ExperimentConfig) -> Result<SelfplayReport> {
    cfg.validate()?;
    let game = resolve_game(&cfg.game)?;
    let outcomes: Vec<ReplicateOutcome> = (0..cfg.replicates)
        .into_par_iter()
        .map(|r| run_replicate(&game, cfg, r))
        .collect::<Result<_>>()?;
    let out = &cfg.out_dir;
    fs::create_dir_all(out)?;
    game.save(out.join("game.json"))?;
    let metrics: Vec<MetricRow> = outcomes.iter().flat_map(|o| o.metrics.clone()).collect();
    let timing: Vec<TimingRow> = outcomes.iter().flat_map(|o| o.timing.clone()).collect();
    let optimism: Vec<OptimismRow> = outcomes.iter().flat_map(|o| o.optimism.clone()).collect();
    write_metrics(&metrics, game.num_agents, BufWriter::new(fs::File::create(out.join("metrics.csv"))?))?;
    write_timing(&timing, BufWriter::new(fs::File::create(out.join("timing.csv"))?))?;
    write_optimism(&optimism, BufWriter::new(fs::File::create(out.join("optimism.csv"))?))?;
    if cfg.dump_trajectories {
        for o in &outcomes {
            fs::create_dir_all(out.join(format!("replicate_{}", o.replicate)))?;
            for agent in 0..game.num_agents {
                o.store.save_agent_csv(agent, trajectory_path(out, o.replicate, agent))?;
            }
        }
    }
    Ok(SelfplayReport {
        game,
        metrics,
        optimism,
        out_dir: out.clone(),
    })
}

/// Re-evaluates gaps from a game and trajectory dumps at each checkpoint
/// (all episodes when `checkpoints` is empty).
pub fn eval_gaps(
    game: &MarkovGame,
    store: &TrajectoryStore,
    checkpoints: &[usize],
    oracle: &dyn BestResponseOracle,
    replicate: usize,
) -> Result<Vec<MetricRow>> {
    let list = if checkpoints.is_empty() {
        vec![store.episodes]
    } else {
        checkpoints.to_vec()
    };
    list.iter()
        .map(|&k| {
            if k == 0 || k > store.episodes {
                return Err(crate::error::Error::Config(format!(
                    "checkpoint {k} outside [1, {}]",
                    store.episodes
                )));
            }
            evaluate_checkpoint(game, &store.prefix(k), oracle, replicate)
        })
        .collect()
}
