use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::game::{MarkovGame, SIMPLEX_TOL};
use crate::simplex::is_distribution;
use crate::vlearning::VisitSnapshot;

/// Visits to one `(step, state)` cell, in episode order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CellVisits {
    /// Strictly increasing 1-based episode indices `k^1 < … < k^t`.
    pub episodes: Vec<usize>,
    /// Per agent, the strategies of every visit flattened as
    /// `[visit * A^i + action]`.
    pub thetas: Vec<Vec<f64>>,
}

impl CellVisits {
    pub fn len(&self) -> usize {
        self.episodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.episodes.is_empty()
    }

    /// Number of visits in episodes strictly before `k`.
    pub fn count_before(&self, k: usize) -> usize {
        self.episodes.partition_point(|&e| e < k)
    }
}

/// Every agent's per-visit strategies from a completed run.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryStore {
    pub episodes: usize,
    pub horizon: usize,
    pub num_states: usize,
    pub action_counts: Vec<usize>,
    cells: Vec<CellVisits>,
}

impl TrajectoryStore {
    pub fn empty(horizon: usize, num_states: usize, action_counts: Vec<usize>) -> Self {
        let n = action_counts.len();
        TrajectoryStore {
            episodes: 0,
            horizon,
            num_states,
            cells: vec![
                CellVisits {
                    episodes: Vec::new(),
                    thetas: vec![Vec::new(); n],
                };
                horizon * num_states
            ],
            action_counts,
        }
    }

    pub fn num_agents(&self) -> usize {
        self.action_counts.len()
    }

    pub fn cell(&self, step: usize, state: usize) -> &CellVisits {
        &self.cells[step * self.num_states + state]
    }

    /// Strategy of `agent` at the `visit`-th (0-based) visit to `(step, state)`.
    pub fn theta(&self, agent: usize, step: usize, state: usize, visit: usize) -> &[f64] {
        let a = self.action_counts[agent];
        &self.cell(step, state).thetas[agent][visit * a..(visit + 1) * a]
    }

    /// `N_h^k(s)`: visits to `(step, state)` in episodes before `k`.
    pub fn visits_before(&self, step: usize, state: usize, k: usize) -> usize {
        self.cell(step, state).count_before(k)
    }

    /// Appends one visit. Episodes must arrive in nondecreasing order with at
    /// most one visit per `(episode, step)`.
    pub fn push(&mut self, episode: usize, step: usize, state: usize, thetas: &[&[f64]]) -> Result<()> {
        if step >= self.horizon || state >= self.num_states {
            return Err(Error::IndexOutOfRange { step, state });
        }
        if episode == 0 || episode < self.episodes {
            return Err(Error::Dimension(format!(
                "episode {episode} arrives after episode {}",
                self.episodes
            )));
        }
        if thetas.len() != self.num_agents() {
            return Err(Error::Dimension(format!(
                "{} strategies for {} agents",
                thetas.len(),
                self.num_agents()
            )));
        }
        for (agent, theta) in thetas.iter().enumerate() {
            if theta.len() != self.action_counts[agent] || !is_distribution(theta, SIMPLEX_TOL) {
                return Err(Error::NotADistribution(format!(
                    "agent {agent} strategy at (k={episode}, h={}, s={state})",
                    step + 1
                )));
            }
        }
        let ns = self.num_states;
        let cell = &mut self.cells[step * ns + state];
        if cell.episodes.last().is_some_and(|&e| e >= episode) {
            return Err(Error::Dimension(format!(
                "(h={}, s={state}) visited twice by episode {episode}",
                step + 1
            )));
        }
        cell.episodes.push(episode);
        for (dst, theta) in cell.thetas.iter_mut().zip(thetas) {
            dst.extend_from_slice(theta);
        }
        self.episodes = episode;
        Ok(())
    }

    /// Builds a store from each agent's snapshot list, keeping episodes `≤ max_episode`.
    pub fn from_snapshots(
        horizon: usize,
        num_states: usize,
        action_counts: Vec<usize>,
        per_agent: &[&[VisitSnapshot]],
        max_episode: usize,
    ) -> Result<Self> {
        let mut store = Self::empty(horizon, num_states, action_counts);
        if per_agent.len() != store.num_agents() {
            return Err(Error::Dimension(format!(
                "{} snapshot lists for {} agents",
                per_agent.len(),
                store.num_agents()
            )));
        }
        let len = per_agent.first().map_or(0, |s| s.len());
        if per_agent.iter().any(|s| s.len() != len) {
            return Err(Error::Dimension("agents recorded different numbers of visits".into()));
        }
        let mut thetas: Vec<&[f64]> = Vec::with_capacity(per_agent.len());
        for v in 0..len {
            let head = &per_agent[0][v];
            if head.episode > max_episode {
                break;
            }
            thetas.clear();
            for snaps in per_agent {
                let s = &snaps[v];
                if (s.episode, s.step, s.state) != (head.episode, head.step, head.state) {
                    return Err(Error::Dimension(format!(
                        "agents disagree on visit {v}: (k={}, h={}, s={}) vs (k={}, h={}, s={})",
                        head.episode,
                        head.step + 1,
                        head.state,
                        s.episode,
                        s.step + 1,
                        s.state
                    )));
                }
                thetas.push(&s.theta);
            }
            store.push(head.episode, head.step, head.state, &thetas)?;
        }
        store.episodes = store.episodes.min(max_episode);
        Ok(store)
    }

    /// The store as it stood after episode `k` (`k ≤ episodes`).
    pub fn prefix(&self, k: usize) -> TrajectoryStore {
        let cells = self
            .cells
            .iter()
            .map(|c| {
                let n = c.count_before(k + 1);
                CellVisits {
                    episodes: c.episodes[..n].to_vec(),
                    thetas: c
                        .thetas
                        .iter()
                        .zip(&self.action_counts)
                        .map(|(t, &a)| t[..n * a].to_vec())
                        .collect(),
                }
            })
            .collect();
        TrajectoryStore {
            episodes: k.min(self.episodes),
            horizon: self.horizon,
            num_states: self.num_states,
            action_counts: self.action_counts.clone(),
            cells,
        }
    }

    /// Checks the store against a game: dimensions, one visit per
    /// `(episode, step)`, and every episode starting in the initial state.
    pub fn check_against(&self, game: &MarkovGame) -> Result<()> {
        if self.horizon != game.horizon
            || self.num_states != game.num_states
            || self.action_counts != game.action_counts
        {
            return Err(Error::Dimension(format!(
                "store (H={}, S={}, A={:?}) vs game (H={}, S={}, A={:?})",
                self.horizon,
                self.num_states,
                self.action_counts,
                game.horizon,
                game.num_states,
                game.action_counts
            )));
        }
        if self.episodes == 0 {
            return Err(Error::EmptyStore);
        }
        for step in 0..self.horizon {
            let total: usize = (0..self.num_states).map(|s| self.cell(step, s).len()).sum();
            if total != self.episodes {
                return Err(Error::Dimension(format!(
                    "step h={} has {total} visits over {} episodes",
                    step + 1,
                    self.episodes
                )));
            }
        }
        if self.cell(0, game.initial_state).len() != self.episodes {
            return Err(Error::Dimension("some episode does not start in the initial state".into()));
        }
        Ok(())
    }

    /// One agent's dump: header `k,h,s,theta_0,…`, rows ordered by `(k, h)`,
    /// 1-based `k` and `h`, shortest round-trip decimals.
    pub fn write_agent_csv<W: Write>(&self, agent: usize, out: W) -> Result<()> {
        let a = self.action_counts[agent];
        let mut rows: Vec<(usize, usize, usize, usize)> = Vec::new();
        for step in 0..self.horizon {
            for s in 0..self.num_states {
                for (v, &k) in self.cell(step, s).episodes.iter().enumerate() {
                    rows.push((k, step, s, v));
                }
            }
        }
        rows.sort_unstable();
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["k".to_string(), "h".to_string(), "s".to_string()];
        header.extend((0..a).map(|i| format!("theta_{i}")));
        w.write_record(&header)?;
        let mut record = Vec::with_capacity(3 + a);
        for (k, step, s, v) in rows {
            record.clear();
            record.push(k.to_string());
            record.push((step + 1).to_string());
            record.push(s.to_string());
            record.extend(self.theta(agent, step, s, v).iter().map(|x| x.to_string()));
            w.write_record(&record)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn save_agent_csv(&self, agent: usize, path: impl AsRef<Path>) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_agent_csv(agent, std::io::BufWriter::new(file))
    }

    /// Rebuilds a store from one dump per agent. `names` label the sources in
    /// error messages. Every episode `1..=K` (K the largest `k` in any dump)
    /// must have exactly one row per step in every dump.
    pub fn from_agent_csvs<R: Read>(game: &MarkovGame, sources: Vec<(String, R)>) -> Result<Self> {
        if sources.len() != game.num_agents {
            return Err(Error::Dimension(format!(
                "{} trajectory dumps for a {}-agent game",
                sources.len(),
                game.num_agents
            )));
        }
        let mut tables: Vec<BTreeMap<(usize, usize), (usize, Vec<f64>)>> = Vec::new();
        for (agent, (name, reader)) in sources.into_iter().enumerate() {
            tables.push(parse_agent_csv(&name, reader, game.action_counts[agent], game)?);
        }
        let k_max = tables
            .iter()
            .filter_map(|t| t.keys().next_back().map(|&(k, _)| k))
            .max()
            .ok_or(Error::EmptyStore)?;
        let mut store = Self::empty(game.horizon, game.num_states, game.action_counts.clone());
        for k in 1..=k_max {
            for step in 0..game.horizon {
                let key = (k, step + 1);
                let known = tables.iter().find_map(|t| t.get(&key)).map(|(s, _)| *s);
                let mut thetas: Vec<&[f64]> = Vec::with_capacity(tables.len());
                for table in &tables {
                    match table.get(&key) {
                        Some((s, theta)) if Some(*s) == known => thetas.push(theta),
                        Some((s, _)) => {
                            return Err(Error::Dimension(format!(
                                "dumps disagree on the state at (k={k}, h={}): {s} vs {}",
                                step + 1,
                                known.unwrap_or(0)
                            )))
                        }
                        None => {
                            return Err(Error::MissingRow {
                                k,
                                h: step + 1,
                                state: known.map_or(String::new(), |s| format!(", s={s}")),
                            })
                        }
                    }
                }
                store.push(k, step, known.unwrap_or(0), &thetas)?;
            }
        }
        Ok(store)
    }

    pub fn load_agent_csvs(game: &MarkovGame, paths: &[impl AsRef<Path>]) -> Result<Self> {
        let mut sources = Vec::with_capacity(paths.len());
        for p in paths {
            let p = p.as_ref();
            sources.push((p.display().to_string(), std::fs::File::open(p)?));
        }
        Self::from_agent_csvs(game, sources)
    }
}

type AgentRows = BTreeMap<(usize, usize), (usize, Vec<f64>)>;

fn parse_agent_csv<R: Read>(name: &str, reader: R, num_actions: usize, game: &MarkovGame) -> Result<AgentRows> {
    let mut rdr = csv::Reader::from_reader(reader);
    let header = rdr.headers()?.clone();
    let mut want = vec!["k".to_string(), "h".to_string(), "s".to_string()];
    want.extend((0..num_actions).map(|i| format!("theta_{i}")));
    if header.iter().ne(want.iter().map(String::as_str)) {
        return Err(Error::Parse {
            location: format!("{name}:1"),
            message: format!("expected header `{}`", want.join(",")),
        });
    }
    let mut rows = AgentRows::new();
    for (i, record) in rdr.records().enumerate() {
        let line = i + 2;
        let err = |message: String| Error::Parse {
            location: format!("{name}:{line}"),
            message,
        };
        let record = record.map_err(|e| err(e.to_string()))?;
        let int = |j: usize| -> Result<usize> {
            record[j]
                .parse::<usize>()
                .map_err(|_| err(format!("column {} `{}` is not an index", want[j], &record[j])))
        };
        let (k, h, s) = (int(0)?, int(1)?, int(2)?);
        if k == 0 || h == 0 || h > game.horizon || s >= game.num_states {
            return Err(err(format!("(k={k}, h={h}, s={s}) out of range")));
        }
        let mut theta = Vec::with_capacity(num_actions);
        for j in 3..3 + num_actions {
            let x: f64 = record[j]
                .parse()
                .map_err(|_| err(format!("column {} `{}` is not a number", want[j], &record[j])))?;
            theta.push(x);
        }
        if rows.insert((k, h), (s, theta)).is_some() {
            return Err(err(format!("duplicate row for (k={k}, h={h})")));
        }
    }
    Ok(rows)
}
