use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use markov_cce::certified::{build_oracle, verify_cce_distribution, TrajectoryStore};
use markov_cce::game::MarkovGame;
use markov_cce::harness::{
    eval_gaps, resolve_game, run_selfplay, run_warmup, trajectory_path, write_metrics, ExperimentConfig, WarmupConfig,
};

#[derive(Parser)]
#[command(name = "markov-cce", version, about = "Decentralized V-learning self-play and CCE certification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a game from a family spec and write it as JSON.
    GenGame {
        /// `hawkdove`, `random(S,A,B,H,seed)`, `team(A,B,seed)` or `coordination(A,B,seed)`.
        #[arg(long)]
        spec: String,
        #[arg(long, default_value = "game.json")]
        out: PathBuf,
    },
    /// Run decentralized self-play and evaluate the certified policy at checkpoints.
    RunSelfplay(SelfplayArgs),
    /// Run the two-player Exp3 warm-up on common-reward matrix games.
    RunWarmup(WarmupArgs),
    /// Re-evaluate gaps offline from a game file and trajectory dumps.
    EvalGaps(EvalArgs),
    /// Check a joint-action distribution of a single-stage game for the CCE property.
    VerifyCce {
        #[arg(long)]
        game: String,
        /// JSON array file, or a comma-separated list of probabilities in joint-action order.
        #[arg(long)]
        dist: String,
        #[arg(long, default_value_t = 1e-9)]
        tolerance: f64,
    },
}

#[derive(Args)]
struct SelfplayArgs {
    /// JSON config file; flags given explicitly override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    game: Option<String>,
    #[arg(long)]
    episodes: Option<usize>,
    #[arg(long)]
    replicates: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated episode indices.
    #[arg(long, value_delimiter = ',')]
    checkpoints: Option<Vec<usize>>,
    #[arg(long)]
    bonus_constant: Option<f64>,
    #[arg(long)]
    confidence: Option<f64>,
    /// `exact` or `index-aware`.
    #[arg(long)]
    oracle: Option<String>,
    #[arg(long)]
    bernoulli_rewards: Option<bool>,
    #[arg(long)]
    dump_trajectories: Option<bool>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

impl SelfplayArgs {
    fn resolve(self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(p) => ExperimentConfig::from_json_file(p)?,
            None => ExperimentConfig::default(),
        };
        macro_rules! set {
            ($($f:ident),*) => { $(if let Some(v) = self.$f { cfg.$f = v; })* };
        }
        set!(game, episodes, replicates, seed, checkpoints, bonus_constant, confidence, oracle, bernoulli_rewards, dump_trajectories, out_dir);
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Args)]
struct WarmupArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// `team` or `coordination`.
    #[arg(long)]
    family: Option<String>,
    /// Action counts as `A,B`.
    #[arg(long, value_delimiter = ',')]
    actions: Option<Vec<usize>>,
    #[arg(long)]
    rounds: Option<usize>,
    #[arg(long)]
    replicates: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    confidence: Option<f64>,
    #[arg(long)]
    trace: Option<bool>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

impl WarmupArgs {
    fn resolve(self) -> Result<WarmupConfig> {
        let mut cfg = match &self.config {
            Some(p) => {
                let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                serde_json::from_str(&text).with_context(|| format!("parsing {}", p.display()))?
            }
            None => WarmupConfig::default(),
        };
        macro_rules! set {
            ($($f:ident),*) => { $(if let Some(v) = self.$f { cfg.$f = v; })* };
        }
        set!(family, rounds, replicates, seed, confidence, trace, out_dir);
        if let Some(a) = self.actions {
            let [x, y] = a[..] else {
                bail!("--actions takes exactly two counts, got {a:?}");
            };
            cfg.actions = [x, y];
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    game: PathBuf,
    /// One dump per agent, in agent order.
    #[arg(long, num_args = 1.., conflicts_with = "run_dir")]
    trajectories: Vec<PathBuf>,
    /// A self-play output directory; dumps are taken from `replicate_<r>/`.
    #[arg(long)]
    run_dir: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    replicate: usize,
    #[arg(long, value_delimiter = ',')]
    checkpoints: Vec<usize>,
    #[arg(long, default_value = "exact")]
    oracle: String,
    /// Metrics CSV destination; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::GenGame { spec, out } => {
            let game = markov_cce::families::generate(&spec)?;
            game.save(&out)?;
            println!("wrote {}", out.display());
        }
        Command::RunSelfplay(args) => {
            let cfg = args.resolve()?;
            let report = run_selfplay(&cfg)?;
            for row in &report.metrics {
                println!("replicate {} checkpoint {} max_gap {}", row.replicate, row.checkpoint, row.max_gap());
            }
            println!("outputs in {}", report.out_dir.display());
        }
        Command::RunWarmup(args) => {
            let cfg = args.resolve()?;
            for o in run_warmup(&cfg)? {
                println!("replicate {} t* {} max_gap {}", o.replicate, o.t_star, o.max_gap());
            }
            println!("outputs in {}", cfg.out_dir.display());
        }
        Command::EvalGaps(args) => eval(args)?,
        Command::VerifyCce { game, dist, tolerance } => {
            let game = resolve_game(&game)?;
            let dist = parse_dist(&dist)?;
            let gaps = verify_cce_distribution(&game, &dist)?;
            for (i, g) in gaps.iter().enumerate() {
                println!("agent {i} gap {g}");
            }
            if gaps.iter().any(|&g| g > tolerance) {
                eprintln!("not a {tolerance}-approximate CCE");
                return Ok(ExitCode::from(2));
            }
            println!("CCE within {tolerance}");
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn eval(args: EvalArgs) -> Result<()> {
    let game = MarkovGame::load(&args.game)?;
    let paths: Vec<PathBuf> = match &args.run_dir {
        Some(dir) => (0..game.num_agents).map(|i| trajectory_path(dir, args.replicate, i)).collect(),
        None => args.trajectories.clone(),
    };
    if paths.len() != game.num_agents {
        bail!("expected {} trajectory files, got {}", game.num_agents, paths.len());
    }
    let store = TrajectoryStore::load_agent_csvs(&game, &paths)?;
    let oracle = build_oracle(&args.oracle)?;
    let rows = eval_gaps(&game, &store, &args.checkpoints, oracle.as_ref(), args.replicate)?;
    match &args.out {
        Some(p) => write_metrics(&rows, game.num_agents, BufWriter::new(fs::File::create(p)?))?,
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            write_metrics(&rows, game.num_agents, &mut lock)?;
            lock.flush()?;
        }
    }
    Ok(())
}

fn parse_dist(text: &str) -> Result<Vec<f64>> {
    let path = std::path::Path::new(text);
    if path.is_file() {
        let raw = fs::read_to_string(path)?;
        return serde_json::from_str(&raw).with_context(|| format!("parsing {}", path.display()));
    }
    text.split(',')
        .map(|x| x.trim().parse::<f64>().with_context(|| format!("bad probability `{x}`")))
        .collect()
}
