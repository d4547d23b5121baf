use std::io;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid game: {0}")]
    InvalidGame(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("agent {agent} returned action {action} but only {count} actions exist")]
    ActionOutOfRange {
        agent: usize,
        action: usize,
        count: usize,
    },

    #[error("agent index {agent} out of range for a {num_agents}-agent game")]
    AgentOutOfRange { agent: usize, num_agents: usize },

    #[error("round index must be at least 1")]
    ZeroRound,

    #[error("stabilization coefficient {0} outside (0, 1]")]
    MixingOutOfRange(f64),

    #[error("loss {0} outside [0, 1]")]
    LossOutOfRange(f64),

    #[error("reward {0} outside [0, 1]")]
    RewardOutOfRange(f64),

    #[error("step {step} / state {state} out of range")]
    IndexOutOfRange { step: usize, state: usize },

    #[error("incomplete visit log: {0}")]
    IncompleteLog(String),

    #[error("trajectory store is empty")]
    EmptyStore,

    #[error("not a probability distribution: {0}")]
    NotADistribution(String),

    #[error("unknown {kind} `{name}` (available: {available})")]
    UnknownName {
        kind: &'static str,
        name: String,
        available: String,
    },

    #[error("bad spec: {0}")]
    BadSpec(String),

    #[error("invalid config: {0}")]
    Config(String),

    #[error("parse error in {location}: {message}")]
    Parse { location: String, message: String },

    #[error("missing trajectory row (k={k}, h={h}{state})")]
    MissingRow { k: usize, h: usize, state: String },

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
