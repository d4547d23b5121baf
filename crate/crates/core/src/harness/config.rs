use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::MarkovGame;

/// Everything that determines a self-play experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// A family spec such as `random(2,2,2,2,7)` or a path to a game JSON file.
    pub game: String,
    pub episodes: usize,
    pub replicates: usize,
    pub seed: u64,
    /// Episode counts at which gaps are evaluated; empty means only `episodes`.
    pub checkpoints: Vec<usize>,
    pub bonus_constant: f64,
    /// Failure probability `p` inside the log factor.
    pub confidence: f64,
    /// Best-response oracle name.
    pub oracle: String,
    pub bernoulli_rewards: bool,
    pub dump_trajectories: bool,
    pub out_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            game: "hawkdove".into(),
            episodes: 1000,
            replicates: 1,
            seed: 0,
            checkpoints: Vec::new(),
            bonus_constant: 2.0,
            confidence: 0.01,
            oracle: "exact".into(),
            bernoulli_rewards: false,
            dump_trajectories: true,
            out_dir: PathBuf::from("out"),
        }
    }
}

impl ExperimentConfig {
    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::Parse {
            location: format!("{}:{}:{}", path.display(), e.line(), e.column()),
            message: e.to_string(),
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.episodes == 0 {
            return Err(Error::Config("episodes must be at least 1".into()));
        }
        if self.replicates == 0 {
            return Err(Error::Config("replicates must be at least 1".into()));
        }
        if let Some(&c) = self.checkpoints.iter().find(|&&c| c == 0 || c > self.episodes) {
            return Err(Error::Config(format!("checkpoint {c} outside [1, {}]", self.episodes)));
        }
        if !(self.bonus_constant > 0.0) {
            return Err(Error::Config(format!("bonus constant {} must be positive", self.bonus_constant)));
        }
        if !(self.confidence > 0.0 && self.confidence <= 1.0) {
            return Err(Error::Config(format!("confidence {} outside (0, 1]", self.confidence)));
        }
        crate::certified::build_oracle(&self.oracle)?;
        Ok(())
    }

    /// Sorted, deduplicated checkpoints, defaulting to the final episode.
    pub fn checkpoint_list(&self) -> Vec<usize> {
        let mut c = if self.checkpoints.is_empty() {
            vec![self.episodes]
        } else {
            self.checkpoints.clone()
        };
        c.sort_unstable();
        c.dedup();
        c
    }
}

/// Loads `source` as a JSON file when it names one, otherwise generates it
/// from a family spec.
pub fn resolve_game(source: &str) -> Result<MarkovGame> {
    let path = Path::new(source);
    if source.ends_with(".json") || path.is_file() {
        MarkovGame::load(path)
    } else {
        crate::families::generate(source)
    }
}
