//! Name-addressable loss sequences for exercising bandit learners.
//!
//! Each generator emits the full loss vector of a round; the learner only
//! ever sees the coordinate it played.

use rand::{Rng, RngCore};

use crate::error::{Error, Result};

pub trait LossAdversary: Send {
    fn name(&self) -> &'static str;

    /// Loss vector for `round` (1-based). `theta` is the learner's current
    /// distribution, available to adaptive adversaries.
    fn losses(&mut self, round: usize, theta: &[f64], rng: &mut dyn RngCore) -> Vec<f64>;
}

/// Round-robin: arm `t mod A` loses 1, every other arm 0.
pub struct Alternating;

impl LossAdversary for Alternating {
    fn name(&self) -> &'static str {
        "alternating"
    }

    fn losses(&mut self, round: usize, theta: &[f64], _: &mut dyn RngCore) -> Vec<f64> {
        let mut l = vec![0.0; theta.len()];
        l[round % theta.len()] = 1.0;
        l
    }
}

/// The good arm changes at every power of two; all other arms lose 1.
pub struct Switching;

impl LossAdversary for Switching {
    fn name(&self) -> &'static str {
        "switching"
    }

    fn losses(&mut self, round: usize, theta: &[f64], _: &mut dyn RngCore) -> Vec<f64> {
        let block = usize::BITS - round.leading_zeros();
        let good = block as usize % theta.len();
        let mut l = vec![1.0; theta.len()];
        l[good] = 0.0;
        l
    }
}

/// Puts loss 1 on the arm the learner currently favours.
pub struct Adaptive;

impl LossAdversary for Adaptive {
    fn name(&self) -> &'static str {
        "adaptive"
    }

    fn losses(&mut self, _: usize, theta: &[f64], _: &mut dyn RngCore) -> Vec<f64> {
        let top = crate::game::argmax_lowest(theta);
        let mut l = vec![0.0; theta.len()];
        l[top] = 1.0;
        l
    }
}

/// Independent Bernoulli losses with means spread evenly over [0.2, 0.8].
pub struct Stochastic;

impl LossAdversary for Stochastic {
    fn name(&self) -> &'static str {
        "stochastic"
    }

    fn losses(&mut self, _: usize, theta: &[f64], rng: &mut dyn RngCore) -> Vec<f64> {
        let a = theta.len();
        (0..a)
            .map(|i| {
                let mean = if a == 1 { 0.5 } else { 0.2 + 0.6 * i as f64 / (a - 1) as f64 };
                if rng.gen::<f64>() < mean {
                    1.0
                } else {
                    0.0
                }
            })
            .collect()
    }
}

pub struct AdversaryEntry {
    pub name: &'static str,
    pub adversarial: bool,
    build: fn() -> Box<dyn LossAdversary>,
}

static ADVERSARIES: &[AdversaryEntry] = &[
    AdversaryEntry {
        name: "alternating",
        adversarial: true,
        build: || Box::new(Alternating),
    },
    AdversaryEntry {
        name: "switching",
        adversarial: true,
        build: || Box::new(Switching),
    },
    AdversaryEntry {
        name: "adaptive",
        adversarial: true,
        build: || Box::new(Adaptive),
    },
    AdversaryEntry {
        name: "stochastic",
        adversarial: false,
        build: || Box::new(Stochastic),
    },
];

pub fn adversaries() -> &'static [AdversaryEntry] {
    ADVERSARIES
}

pub fn build_adversary(name: &str) -> Result<Box<dyn LossAdversary>> {
    ADVERSARIES
        .iter()
        .find(|e| e.name == name)
        .map(|e| (e.build)())
        .ok_or_else(|| Error::UnknownName {
            kind: "loss adversary",
            name: name.to_string(),
            available: ADVERSARIES.iter().map(|e| e.name).collect::<Vec<_>>().join(", "),
        })
}
