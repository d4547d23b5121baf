//! Name-addressable game generators.
//!
//! A spec string is either a bare family name (`hawkdove`) or a name with
//! comma-separated integer arguments (`random(2,2,2,2,7)`).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::game::MarkovGame;

pub struct FamilyEntry {
    pub name: &'static str,
    /// Argument names, in order.
    pub params: &'static [&'static str],
    pub summary: &'static str,
    build: fn(&[u64]) -> Result<MarkovGame>,
}

static FAMILIES: &[FamilyEntry] = &[
    FamilyEntry {
        name: "hawkdove",
        params: &[],
        summary: "2x2 Hawk-Dove, payoffs divided by 5",
        build: |_| hawk_dove(),
    },
    FamilyEntry {
        name: "random",
        params: &["S", "A", "B", "H", "seed"],
        summary: "two players, iid uniform rewards, Dirichlet(1) transitions",
        build: |a| random_game(dim(a[0])?, dim(a[1])?, dim(a[2])?, dim(a[3])?, a[4]),
    },
    FamilyEntry {
        name: "team",
        params: &["A", "B", "seed"],
        summary: "single-stage common-reward game with iid uniform payoffs",
        build: |a| team_game(dim(a[0])?, dim(a[1])?, a[2]),
    },
    FamilyEntry {
        name: "coordination",
        params: &["A", "B", "seed"],
        summary: "single-stage common-reward game: one random joint action pays 1, the rest 0",
        build: |a| coordination_game(dim(a[0])?, dim(a[1])?, a[2]),
    },
];

pub fn families() -> &'static [FamilyEntry] {
    FAMILIES
}

fn dim(x: u64) -> Result<usize> {
    if x == 0 {
        return Err(Error::BadSpec("dimensions must be positive".into()));
    }
    usize::try_from(x).map_err(|_| Error::BadSpec(format!("dimension {x} too large")))
}

/// Splits `name(a,b,c)` into the name and its integer arguments.
pub fn parse_spec(spec: &str) -> Result<(String, Vec<u64>)> {
    let spec = spec.trim();
    let Some(open) = spec.find('(') else {
        return Ok((spec.to_string(), Vec::new()));
    };
    let inner = spec[open + 1..]
        .strip_suffix(')')
        .ok_or_else(|| Error::BadSpec(format!("missing closing parenthesis in `{spec}`")))?;
    let args = if inner.trim().is_empty() {
        Vec::new()
    } else {
        inner
            .split(',')
            .map(|x| {
                x.trim()
                    .parse::<u64>()
                    .map_err(|_| Error::BadSpec(format!("`{}` is not a nonnegative integer", x.trim())))
            })
            .collect::<Result<_>>()?
    };
    Ok((spec[..open].trim().to_string(), args))
}

pub fn generate(spec: &str) -> Result<MarkovGame> {
    let (name, args) = parse_spec(spec)?;
    let entry = FAMILIES.iter().find(|e| e.name == name).ok_or_else(|| Error::UnknownName {
        kind: "game family",
        name: name.clone(),
        available: FAMILIES.iter().map(|e| e.name).collect::<Vec<_>>().join(", "),
    })?;
    if args.len() != entry.params.len() {
        return Err(Error::BadSpec(format!(
            "`{name}` takes ({}), got {} argument(s)",
            entry.params.join(","),
            args.len()
        )));
    }
    (entry.build)(&args)?.checked()
}

pub fn hawk_dove() -> Result<MarkovGame> {
    let payoffs = [[4.0, 4.0], [1.0, 5.0], [5.0, 1.0], [0.0, 0.0]];
    MarkovGame::normal_form(
        vec![2, 2],
        payoffs.iter().map(|p| p.iter().map(|x| x / 5.0).collect()).collect(),
    )
}

fn dirichlet_ones<R: Rng>(n: usize, rng: &mut R) -> Vec<f64> {
    let mut v: Vec<f64> = (0..n).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
    crate::simplex::normalize(&mut v);
    v
}

pub fn random_game(states: usize, a: usize, b: usize, horizon: usize, seed: u64) -> Result<MarkovGame> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let joint = a * b;
    let mut rewards = Vec::with_capacity(horizon);
    let mut transitions = Vec::with_capacity(horizon);
    for _ in 0..horizon {
        let mut r_h = Vec::with_capacity(states);
        let mut p_h = Vec::with_capacity(states);
        for _ in 0..states {
            r_h.push((0..joint).map(|_| vec![rng.gen::<f64>(), rng.gen::<f64>()]).collect::<Vec<_>>());
            p_h.push((0..joint).map(|_| dirichlet_ones(states, &mut rng)).collect::<Vec<_>>());
        }
        rewards.push(r_h);
        transitions.push(p_h);
    }
    Ok(MarkovGame {
        num_agents: 2,
        horizon,
        num_states: states,
        action_counts: vec![a, b],
        initial_state: 0,
        rewards,
        transitions,
    })
}

pub fn team_game(a: usize, b: usize, seed: u64) -> Result<MarkovGame> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let payoffs = (0..a * b)
        .map(|_| {
            let r = rng.gen::<f64>();
            vec![r, r]
        })
        .collect();
    MarkovGame::normal_form(vec![a, b], payoffs)
}

pub fn coordination_game(a: usize, b: usize, seed: u64) -> Result<MarkovGame> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let best = rng.gen_range(0..a * b);
    let payoffs = (0..a * b)
        .map(|j| if j == best { vec![1.0, 1.0] } else { vec![0.0, 0.0] })
        .collect();
    MarkovGame::normal_form(vec![a, b], payoffs)
}
