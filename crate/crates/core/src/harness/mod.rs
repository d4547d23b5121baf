//! Experiment orchestration: configuration, seed splitting, self-play runs
//! with checkpointed gap evaluation, the two-player bandit warm-up, and CSV
//! output.

pub mod config;
pub mod metrics;
pub mod seeds;
pub mod selfplay;
pub mod warmup;

pub use config::{resolve_game, ExperimentConfig};
pub use metrics::{read_metrics, write_metrics, MetricRow, OptimismRow, TimingRow};
pub use seeds::{derive_seed, stream, Role};
pub use selfplay::{eval_gaps, run_replicate, run_selfplay, trajectory_path, ReplicateOutcome, SelfplayReport};
pub use warmup::{run_warmup, run_warmup_team, WarmupConfig, WarmupOutcome};
