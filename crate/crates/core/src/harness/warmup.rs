//! Two Exp3 players on a single-stage common-reward game, with a
//! shared-seed uniform time index picking the strategy pair to report.

use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::seeds::{derive_seed, stream, Role};
use crate::bandit::{unit_regret_rows, BanditLearner, BanditTrace, RegretRow, StabilizedOmd};
use crate::error::{Error, Result};
use crate::game::{ne_gap, MarkovGame, MarkovPolicy};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WarmupConfig {
    /// `team` or `coordination`; the game seed is derived per replicate.
    pub family: String,
    pub actions: [usize; 2],
    pub rounds: usize,
    pub replicates: usize,
    pub seed: u64,
    /// `p` for the regret-bound log factor in traces.
    pub confidence: f64,
    /// Write per-round regret traces for replicate 0.
    pub trace: bool,
    pub out_dir: PathBuf,
}

impl Default for WarmupConfig {
    fn default() -> Self {
        WarmupConfig {
            family: "team".into(),
            actions: [2, 2],
            rounds: 10_000,
            replicates: 1,
            seed: 0,
            confidence: 0.01,
            trace: false,
            out_dir: PathBuf::from("out"),
        }
    }
}

impl WarmupConfig {
    pub fn validate(&self) -> Result<()> {
        if self.rounds == 0 || self.replicates == 0 || self.actions.contains(&0) {
            return Err(Error::Config("rounds, replicates and action counts must be positive".into()));
        }
        if !matches!(self.family.as_str(), "team" | "coordination") {
            return Err(Error::Config(format!("`{}` is not a common-reward family", self.family)));
        }
        Ok(())
    }

    pub fn game(&self, replicate: usize) -> Result<MarkovGame> {
        let game_seed = derive_seed(self.seed, replicate, Role::Game);
        crate::families::generate(&format!(
            "{}({},{},{game_seed})",
            self.family, self.actions[0], self.actions[1]
        ))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WarmupOutcome {
    pub replicate: usize,
    pub t_star: usize,
    pub strategies: [Vec<f64>; 2],
    pub gaps: Vec<f64>,
    /// Per player, realized regret after `⌊T/4⌋` and `T` rounds.
    pub regret_quarter: [f64; 2],
    pub regret_full: [f64; 2],
    pub rounds: usize,
    pub traces: Option<[Vec<RegretRow>; 2]>,
}

impl WarmupOutcome {
    pub fn max_gap(&self) -> f64 {
        self.gaps.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Whether average regret at `T` is below average regret at `⌊T/4⌋`.
    pub fn sublinear(&self, player: usize) -> bool {
        let quarter = (self.rounds / 4).max(1) as f64;
        let full = self.regret_full[player] / self.rounds as f64;
        full < self.regret_quarter[player] / quarter
    }
}

/// Realized regret tracker: best fixed own action against the opponent's
/// realized actions, minus the rewards actually collected.
struct Regret {
    hindsight: Vec<f64>,
    collected: f64,
}

impl Regret {
    fn value(&self) -> f64 {
        self.hindsight.iter().copied().fold(f64::NEG_INFINITY, f64::max) - self.collected
    }
}

pub fn run_warmup_team(game: &MarkovGame, rounds: usize, seed: u64, replicate: usize, trace: Option<f64>) -> Result<WarmupOutcome> {
    if game.num_agents != 2 || game.horizon != 1 || game.num_states != 1 {
        return Err(Error::Dimension("warm-up needs a two-player single-stage game".into()));
    }
    if rounds == 0 {
        return Err(Error::ZeroRound);
    }
    let ja = game.joint_actions();
    let counts = [game.action_counts[0], game.action_counts[1]];
    let mut players = [StabilizedOmd::exp3(counts[0]), StabilizedOmd::exp3(counts[1])];
    let mut rngs = [stream(seed, replicate, Role::Agent(0)), stream(seed, replicate, Role::Agent(1))];
    let t_star = stream(seed, replicate, Role::Shared).gen_range(1..=rounds);
    let mut strategies = [Vec::new(), Vec::new()];
    let mut regret = counts.map(|a| Regret {
        hindsight: vec![0.0; a],
        collected: 0.0,
    });
    let mut regret_quarter = [0.0; 2];
    let mut traces = trace.map(|_| [BanditTrace::default(), BanditTrace::default()]);
    let quarter = (rounds / 4).max(1);
    let mut joint = [0usize; 2];
    for t in 1..=rounds {
        if t == t_star {
            strategies = [players[0].distribution().to_vec(), players[1].distribution().to_vec()];
        }
        for i in 0..2 {
            joint[i] = players[i].sample(&mut rngs[i]);
        }
        for i in 0..2 {
            let mut dev = joint;
            let rewards: Vec<f64> = (0..counts[i])
                .map(|a| {
                    dev[i] = a;
                    game.reward(0, 0, ja.encode(&dev), i)
                })
                .collect();
            for (h, r) in regret[i].hindsight.iter_mut().zip(&rewards) {
                *h += r;
            }
            regret[i].collected += rewards[joint[i]];
            if let Some(tr) = &mut traces {
                tr[i].thetas.push(players[i].distribution().to_vec());
                tr[i].losses.push(rewards.iter().map(|r| 1.0 - r).collect());
                tr[i].actions.push(joint[i]);
            }
            players[i].update_reward(joint[i], rewards[joint[i]])?;
        }
        if t == quarter {
            regret_quarter = [regret[0].value(), regret[1].value()];
        }
    }
    let policies = [
        MarkovPolicy::stationary(game, 0, &strategies[0]),
        MarkovPolicy::stationary(game, 1, &strategies[1]),
    ];
    let gaps = ne_gap(game, &policies)?;
    let traces = match (traces, trace) {
        (Some([a, b]), Some(p)) => Some([unit_regret_rows(&a, p), unit_regret_rows(&b, p)]),
        _ => None,
    };
    Ok(WarmupOutcome {
        replicate,
        t_star,
        strategies,
        gaps,
        regret_quarter,
        regret_full: [regret[0].value(), regret[1].value()],
        rounds,
        traces,
    })
}

pub fn write_warmup<W: std::io::Write>(rows: &[WarmupOutcome], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "replicate",
        "t_star",
        "max_gap",
        "gap_agent0",
        "gap_agent1",
        "regret_quarter_agent0",
        "regret_full_agent0",
        "regret_quarter_agent1",
        "regret_full_agent1",
    ])?;
    for r in rows {
        w.write_record([
            r.replicate.to_string(),
            r.t_star.to_string(),
            r.max_gap().to_string(),
            r.gaps[0].to_string(),
            r.gaps[1].to_string(),
            r.regret_quarter[0].to_string(),
            r.regret_full[0].to_string(),
            r.regret_quarter[1].to_string(),
            r.regret_full[1].to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_regret_trace<W: std::io::Write>(rows: &[RegretRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["round", "weight", "realized_loss", "regret", "bound"])?;
    for r in rows {
        w.write_record([
            r.round.to_string(),
            r.weight.to_string(),
            r.realized_loss.to_string(),
            r.regret.to_string(),
            r.bound.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Runs every replicate and writes `warmup.csv` (plus
/// `regret_agent<i>.csv` for replicate 0 when tracing).
pub fn run_warmup(cfg: &WarmupConfig) -> Result<Vec<WarmupOutcome>> {
    cfg.validate()?;
    let outcomes: Vec<WarmupOutcome> = (0..cfg.replicates)
        .into_par_iter()
        .map(|r| {
            let trace = (cfg.trace && r == 0).then_some(cfg.confidence);
            run_warmup_team(&cfg.game(r)?, cfg.rounds, cfg.seed, r, trace)
        })
        .collect::<Result<_>>()?;
    write_warmup_outputs(&cfg.out_dir, &outcomes)?;
    Ok(outcomes)
}

fn write_warmup_outputs(out: &Path, outcomes: &[WarmupOutcome]) -> Result<()> {
    fs::create_dir_all(out)?;
    write_warmup(outcomes, BufWriter::new(fs::File::create(out.join("warmup.csv"))?))?;
    if let Some(traces) = outcomes.first().and_then(|o| o.traces.as_ref()) {
        for (i, rows) in traces.iter().enumerate() {
            write_regret_trace(rows, BufWriter::new(fs::File::create(out.join(format!("regret_agent{i}.csv")))?))?;
        }
    }
    Ok(())
}
