//! Acceptance criteria #1-#9. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails. Run alone with `cargo test --test acceptance`.

mod common;

use std::fs;
use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use markov_cce::bandit::adversary::adversaries;
use markov_cce::bandit::{alpha_weights, bandit_iota, build_adversary, run_bandit, weighted_regret, StabilizedOmd, Weighting};
use markov_cce::bandit::ScheduleParams;
use markov_cce::certified::{
    execute_certified, value_of_certified, verify_cce_distribution, BestResponseOracle, CertifiedPolicy,
    ObservationLimited, Start,
};
use markov_cce::families::{hawk_dove, random_game};
use markov_cce::game::{ne_gap, MarkovPolicy, Observation};
use markov_cce::harness::{read_metrics, run_selfplay, run_warmup, ExperimentConfig, WarmupConfig};
use markov_cce::vlearning::AgentState;

use common::{alpha, brute_force_best_response, random_store};

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// Hawk-Dove: the equal-thirds CCE and the three NE have zero gaps.
fn hawk_dove_equilibria() -> Outcome {
    let game = hawk_dove().map_err(|e| e.to_string())?;
    // Row-major (a1,b1), (a1,b2), (a2,b1), (a2,b2), payoffs divided by 5.
    let table = [[4.0, 4.0], [1.0, 5.0], [5.0, 1.0], [0.0, 0.0]];
    for (j, pair) in table.iter().enumerate() {
        for (i, &v) in pair.iter().enumerate() {
            if (game.reward(0, 0, j, i) - v / 5.0).abs() > 1e-15 {
                return Err(format!("payoff of agent {i} at joint action {j} is {}", game.reward(0, 0, j, i)));
            }
        }
    }
    let third = 1.0 / 3.0;
    let cce = verify_cce_distribution(&game, &[third, third, third, 0.0]).map_err(|e| e.to_string())?;
    let profiles: [([f64; 2], [f64; 2]); 3] = [([1.0, 0.0], [0.0, 1.0]), ([0.0, 1.0], [1.0, 0.0]), ([0.5, 0.5], [0.5, 0.5])];
    let mut worst = cce.iter().fold(0.0f64, |m, g| m.max(g.abs()));
    for (row, col) in profiles {
        let policies = [MarkovPolicy::stationary(&game, 0, &row), MarkovPolicy::stationary(&game, 1, &col)];
        let gaps = ne_gap(&game, &policies).map_err(|e| e.to_string())?;
        worst = gaps.iter().fold(worst, |m, g| m.max(g.abs()));
    }
    check(worst <= 1e-12, format!("cce gaps {cce:?}, largest |gap| over CCE and 3 NE = {worst:e}"))
}

/// The five weight properties for H in {1, 2, 5}.
fn alpha_weight_suite() -> Outcome {
    const TOL: f64 = 1e-9;
    const T_MAX: usize = 10_000;
    const T_TAIL: usize = 100_000;
    let mut failures = Vec::new();
    let mut notes = Vec::new();
    for horizon in [1usize, 2, 5] {
        let h = horizon as f64;
        let zero = alpha_weights(0, horizon);
        if !zero.weights.is_empty() || zero.initial != 1.0 {
            failures.push(format!("H={horizon}: t=0 weights {zero:?}"));
        }
        // Independent recurrence: α_t^i = α_{t-1}^i (1 − α_t), α_t^t = α_t.
        let mut reference: Vec<f64> = Vec::new();
        let mut max_dev = 0.0f64;
        for t in 1..=T_MAX {
            let a_t = (h + 1.0) / (h + t as f64);
            reference.iter_mut().for_each(|w| *w *= 1.0 - a_t);
            reference.push(a_t);
            let w = alpha_weights(t, horizon);
            for (x, y) in w.weights.iter().zip(&reference) {
                max_dev = max_dev.max((x - y).abs());
            }
            let tf = t as f64;
            let sum: f64 = w.weights.iter().sum();
            let inv: f64 = w.weights.iter().enumerate().map(|(i, a)| a / ((i + 1) as f64).sqrt()).sum();
            let max = w.weights.iter().copied().fold(0.0, f64::max);
            let squares: f64 = w.weights.iter().map(|a| a * a).sum();
            let bad = [
                ((sum - 1.0).abs() > TOL || w.initial.abs() > TOL, "item 1"),
                (inv < 1.0 / tf.sqrt() - TOL || inv > 2.0 / tf.sqrt() + TOL, "item 3"),
                (max > 2.0 * h / tf + TOL || squares > 2.0 * h / tf + TOL, "item 4"),
            ];
            for (failed, item) in bad {
                if failed {
                    failures.push(format!("H={horizon} t={t}: {item}"));
                }
            }
        }
        if max_dev > 1e-12 {
            failures.push(format!("H={horizon}: weights deviate from recurrence by {max_dev:e}"));
        }
        // Item 5: Σ_{t=i}^{T} α_t^i rises to 1 + 1/H.
        let target = 1.0 + 1.0 / h;
        let mut worst_gap = 0.0f64;
        for i in 1..=10usize {
            let mut tail = (h + 1.0) / (h + i as f64);
            let mut partial = tail;
            for t in i + 1..=T_TAIL {
                tail *= 1.0 - (h + 1.0) / (h + t as f64);
                partial += tail;
                if partial > target + TOL {
                    failures.push(format!("H={horizon} i={i}: partial sum {partial} exceeds {target} at T={t}"));
                    break;
                }
            }
            worst_gap = worst_gap.max(target - partial);
        }
        notes.push(format!("H={horizon}: max deficit at T=1e5 {worst_gap:.3e}"));
        if worst_gap > 1e-6 {
            failures.push(format!("H={horizon}: item 5 deficit {worst_gap:.3e} > 1e-6 at T=1e5"));
        }
    }
    let detail = format!("{}; t<=1e4, i in 1..=10", notes.join(", "));
    if failures.is_empty() {
        Ok(detail)
    } else {
        Err(format!("{detail}; {}", failures.join("; ")))
    }
}

/// Incremental V against the α-weighted closed form on random visit logs.
fn value_update_equivalence() -> Outcome {
    let mut worst = 0.0f64;
    for log_seed in 0..1000u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(log_seed);
        let horizon = rng.gen_range(1..=5usize);
        let states = rng.gen_range(1..=3usize);
        let actions = rng.gen_range(1..=4usize);
        let c = 2.0;
        let iota = rng.gen_range(1.0..10.0);
        let params = ScheduleParams::new(horizon, c, iota).map_err(|e| e.to_string())?;
        let mut agent = AgentState::new(actions, states, params).map_err(|e| e.to_string())?.with_log();
        let mut targets: Vec<Vec<(f64, f64)>> = vec![Vec::new(); horizon * states];
        for _ in 0..rng.gen_range(1..=300) {
            let obs = Observation {
                step: rng.gen_range(0..horizon),
                state: rng.gen_range(0..states),
                action: rng.gen_range(0..actions),
                reward: rng.gen(),
                next_state: rng.gen_range(0..states),
            };
            let next_value = agent.clipped_value(obs.step + 1, obs.next_state);
            targets[obs.step * states + obs.state].push((obs.reward, next_value));
            agent.observe(&obs).map_err(|e| e.to_string())?;
        }
        for step in 0..horizon {
            for s in 0..states {
                let log = &targets[step * states + s];
                let t = log.len();
                let h = horizon as f64;
                let mut closed = if t == 0 { (horizon - step) as f64 } else { 0.0 };
                for (i, (r, v)) in log.iter().enumerate() {
                    let bonus = c * (h.powi(4) * actions as f64 * iota / (i + 1) as f64).sqrt();
                    closed += alpha(t, i + 1, horizon) * (r + v + bonus);
                }
                let incremental = agent.value(step, s);
                let library = agent.reconstruct_value(step, s).map_err(|e| e.to_string())?;
                worst = worst.max((incremental - closed).abs()).max((library - closed).abs());
            }
        }
    }
    check(worst <= 1e-9, format!("1000 logs, max |incremental - closed form| = {worst:e}"))
}

/// Weighted-regret bound of stabilized OMD across generators and weightings.
fn omd_regret_bound() -> Outcome {
    const ROUNDS: usize = 2000;
    const SEEDS: u64 = 200;
    const P: f64 = 0.01;
    let mut lines = Vec::new();
    let mut ok = true;
    let mut worst_ratio = 0.0f64;
    for a in [2usize, 5] {
        for weighting in [Weighting::Unit, Weighting::Alpha { horizon: 1 }, Weighting::Alpha { horizon: 2 }, Weighting::Alpha { horizon: 5 }] {
            let weights: Vec<f64> = match weighting {
                Weighting::Unit => vec![1.0; ROUNDS],
                Weighting::Alpha { horizon } => (1..=ROUNDS).map(|i| alpha(ROUNDS, i, horizon)).collect(),
            };
            let bound = independent_bound(&weights, a, bandit_iota(a, ROUNDS, P));
            for entry in adversaries() {
                let mut held = 0;
                for seed in 0..SEEDS {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    let mut learner = StabilizedOmd::new(a, weighting);
                    let mut adversary = build_adversary(entry.name).map_err(|e| e.to_string())?;
                    let trace = run_bandit(&mut learner, adversary.as_mut(), ROUNDS, &mut rng).map_err(|e| e.to_string())?;
                    let regret = weighted_regret(&trace.thetas, &trace.losses, &weights, ROUNDS).map_err(|e| e.to_string())?;
                    worst_ratio = worst_ratio.max(regret / bound);
                    if regret <= bound {
                        held += 1;
                    }
                }
                if held < 194 {
                    ok = false;
                    lines.push(format!("A={a} {weighting:?} {}: {held}/200", entry.name));
                }
            }
        }
    }
    let detail = format!(
        "2 x 4 weightings x {} generators x 200 seeds, worst regret/bound {worst_ratio:.3}{}",
        adversaries().len(),
        if lines.is_empty() { String::new() } else { format!("; below 194: {}", lines.join(", ")) }
    );
    check(ok, detail)
}

fn independent_bound(w: &[f64], a: usize, iota: f64) -> f64 {
    let (a, t) = (a as f64, w.len() as f64);
    let max = w.iter().copied().fold(0.0, f64::max);
    let harmonic: f64 = w.iter().enumerate().map(|(i, x)| x / ((i + 1) as f64).sqrt()).sum();
    let squares: f64 = w.iter().map(|x| x * x).sum();
    2.0 * max * (a * t * iota).sqrt() + 1.5 * (a * iota).sqrt() * harmonic + 0.5 * max * iota + (2.0 * iota * squares).sqrt()
}

/// Exact best response against brute-force enumeration, and on-path value
/// against Monte-Carlo execution.
fn certified_oracles() -> Outcome {
    let mut worst = 0.0f64;
    for seed in 0..10u64 {
        let game = random_game(2, 2, 2, 2, 300 + seed).map_err(|e| e.to_string())?;
        let store = random_store(&game, 3, seed);
        for agent in 0..2 {
            for start in [Start::Uniform, Start::At(1), Start::At(2), Start::At(3), Start::At(4)] {
                let exact = ObservationLimited.value(&game, &store, agent, start).map_err(|e| e.to_string())?;
                let brute = brute_force_best_response(&game, &store, agent, start);
                worst = worst.max((exact - brute).abs());
            }
        }
    }
    let mut worst_z = 0.0f64;
    let n = 100_000;
    for seed in 0..3u64 {
        let game = random_game(2, 2, 2, 2, 300 + seed).map_err(|e| e.to_string())?;
        let store = random_store(&game, 3, seed);
        let policy = CertifiedPolicy::new(&store, 1000 + seed);
        let mut actors = policy.actors(&[2000 + seed, 3000 + seed]);
        let mut env = ChaCha8Rng::seed_from_u64(4000 + seed);
        let (mut sums, mut squares) = ([0.0; 2], [0.0; 2]);
        for _ in 0..n {
            let ret = execute_certified(&game, &mut actors, &mut env).map_err(|e| e.to_string())?.returns();
            for i in 0..2 {
                sums[i] += ret[i];
                squares[i] += ret[i] * ret[i];
            }
        }
        for agent in 0..2 {
            let mean = sums[agent] / n as f64;
            let se = ((squares[agent] / n as f64 - mean * mean) / n as f64).sqrt();
            let value = value_of_certified(&game, &store, agent).map_err(|e| e.to_string())?;
            worst_z = worst_z.max((mean - value).abs() / se);
        }
    }
    check(
        worst <= 1e-12 && worst_z <= 3.0,
        format!("max |exact - brute force| = {worst:e} over 10 stores; max Monte-Carlo |z| = {worst_z:.2} at 1e5 episodes"),
    )
}

fn selfplay_config(r: usize, out: &Path, dump: bool) -> ExperimentConfig {
    ExperimentConfig {
        game: format!("random(2,2,2,2,{})", 1000 + r),
        episodes: 40_000,
        replicates: 1,
        seed: r as u64,
        checkpoints: vec![10_000, 40_000],
        dump_trajectories: dump,
        out_dir: out.join(format!("run{r}")),
        ..Default::default()
    }
}

/// Runs for #6 and #7; replicate 0 also dumps trajectories for #9.
fn selfplay_runs(out: &Path) -> Result<(), String> {
    for r in 0..10 {
        run_selfplay(&selfplay_config(r, out, r == 0)).map_err(|e| e.to_string())?;
    }
    Ok(())
}

fn gap_decay(out: &Path) -> Outcome {
    let (mut early, mut late) = (0.0, 0.0);
    for r in 0..10 {
        let rows = read_metrics(fs::File::open(out.join(format!("run{r}/metrics.csv"))).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;
        for row in rows {
            match row.checkpoint {
                10_000 => early += row.max_gap() / 10.0,
                40_000 => late += row.max_gap() / 10.0,
                other => return Err(format!("unexpected checkpoint {other}")),
            }
        }
    }
    let ratio = late / early;
    check(
        ratio <= 0.75 && late <= 0.2 * 2.0,
        format!("mean max gap {early:.4} at K=1e4, {late:.4} at K=4e4, ratio {ratio:.3} (need <= 0.75, final <= 0.4)"),
    )
}

fn optimism(out: &Path) -> Outcome {
    let (mut total, mut violations) = (0usize, 0usize);
    let mut min_margin = f64::INFINITY;
    for r in 0..10 {
        let mut rdr = csv::Reader::from_path(out.join(format!("run{r}/optimism.csv"))).map_err(|e| e.to_string())?;
        for rec in rdr.records() {
            let rec = rec.map_err(|e| e.to_string())?;
            let field = |i: usize| rec[i].to_string();
            total += field(2).parse::<usize>().map_err(|e| e.to_string())?;
            violations += field(3).parse::<usize>().map_err(|e| e.to_string())?;
            min_margin = min_margin.min(field(4).parse::<f64>().map_err(|e| e.to_string())?);
        }
    }
    let share = 1.0 - violations as f64 / total as f64;
    check(
        share >= 0.99,
        format!("{violations} violations over {total} (agent, k) pairs, share {share:.4}, min margin {min_margin:.4}"),
    )
}

fn warmup_config(out: &Path) -> WarmupConfig {
    WarmupConfig {
        family: "team".into(),
        actions: [2, 2],
        rounds: 100_000,
        replicates: 20,
        seed: 0,
        out_dir: out.to_path_buf(),
        ..Default::default()
    }
}

fn warmup(out: &Path) -> Outcome {
    let cfg = warmup_config(out);
    let outcomes = run_warmup(&cfg).map_err(|e| e.to_string())?;
    let mut gaps = Vec::new();
    let mut sublinear = 0;
    let mut mismatch = 0.0f64;
    for o in &outcomes {
        // Best response to each mixed strategy, straight from the payoff grid.
        let game = cfg.game(o.replicate).map_err(|e| e.to_string())?;
        let [mu, nu] = &o.strategies;
        let r = |i: usize, a: usize, b: usize| game.reward(0, 0, a * 2 + b, i);
        let on_path: f64 = (0..2).flat_map(|a| (0..2).map(move |b| (a, b))).map(|(a, b)| mu[a] * nu[b] * r(0, a, b)).sum();
        let row_best = (0..2).map(|a| nu[0] * r(0, a, 0) + nu[1] * r(0, a, 1)).fold(f64::MIN, f64::max);
        let col_on: f64 = (0..2).flat_map(|a| (0..2).map(move |b| (a, b))).map(|(a, b)| mu[a] * nu[b] * r(1, a, b)).sum();
        let col_best = (0..2).map(|b| mu[0] * r(1, 0, b) + mu[1] * r(1, 1, b)).fold(f64::MIN, f64::max);
        mismatch = mismatch.max((row_best - on_path - o.gaps[0]).abs()).max((col_best - col_on - o.gaps[1]).abs());
        gaps.push(o.max_gap());
        if o.sublinear(0) && o.sublinear(1) {
            sublinear += 1;
        }
    }
    gaps.sort_by(f64::total_cmp);
    let median = (gaps[9] + gaps[10]) / 2.0;
    check(
        median < 0.1 && sublinear >= 18 && mismatch <= 1e-12,
        format!("median NE gap {median:.4}, sublinear for both players in {sublinear}/20 seeds, gap oracle mismatch {mismatch:e}"),
    )
}

fn determinism(out: &Path) -> Outcome {
    let again = out.join("again");
    run_selfplay(&selfplay_config(0, &again, true)).map_err(|e| e.to_string())?;
    run_warmup(&warmup_config(&again.join("warmup"))).map_err(|e| e.to_string())?;
    let files = [
        ("run0/metrics.csv", "run0/metrics.csv"),
        ("run0/optimism.csv", "run0/optimism.csv"),
        ("run0/game.json", "run0/game.json"),
        ("run0/replicate_0/trajectory_agent0.csv", "run0/replicate_0/trajectory_agent0.csv"),
        ("run0/replicate_0/trajectory_agent1.csv", "run0/replicate_0/trajectory_agent1.csv"),
        ("warmup/warmup.csv", "warmup/warmup.csv"),
    ];
    let mut differing = Vec::new();
    for (a, b) in files {
        let x = fs::read(out.join(a)).map_err(|e| format!("{a}: {e}"))?;
        let y = fs::read(again.join(b)).map_err(|e| format!("{b}: {e}"))?;
        if x != y {
            differing.push(a);
        }
    }
    check(
        differing.is_empty(),
        format!("{} output files compared byte for byte; differing: {differing:?}", files.len()),
    )
}

fn main() -> ExitCode {
    let dir = tempfile::tempdir().expect("temp dir");
    let out = dir.path();
    let started = Instant::now();
    let runs = selfplay_runs(out);
    let run_secs = started.elapsed().as_secs_f64();
    let criteria: Vec<(usize, &str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        (1, "hawk-dove CCE and NE gaps", Box::new(hawk_dove_equilibria)),
        (2, "alpha weight properties", Box::new(alpha_weight_suite)),
        (3, "incremental vs closed-form value", Box::new(value_update_equivalence)),
        (4, "OMD weighted-regret bound", Box::new(omd_regret_bound)),
        (5, "certified-policy oracles", Box::new(certified_oracles)),
        (6, "CCE gap decay", Box::new(|| {
            runs.clone()
                .and_then(|_| gap_decay(out))
                .map(|d| format!("{d}; shared self-play runs took {run_secs:.1}s"))
        })),
        (7, "optimism", Box::new(|| runs.clone().and_then(|_| optimism(out)))),
        (8, "team warm-up", Box::new(|| warmup(&out.join("warmup")))),
        (9, "determinism", Box::new(|| runs.clone().and_then(|_| determinism(out)))),
    ];
    let mut failed = 0;
    for (id, name, run) in &criteria {
        let started = Instant::now();
        let result = run();
        let secs = started.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("acceptance #{id} PASS {name} ({secs:.1}s): {detail}"),
            Err(detail) => {
                failed += 1;
                println!("acceptance #{id} FAIL {name} ({secs:.1}s): {detail}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
