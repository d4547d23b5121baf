//! Decentralized V-learning with a stabilized online-mirror-descent bandit
//! subroutine for tabular episodic general-sum Markov games, the certified
//! correlated policy built from its trajectories, and exact dynamic-programming
//! oracles for its coarse-correlated-equilibrium gap.

pub mod bandit;
pub mod certified;
pub mod error;
pub mod families;
pub mod game;
pub mod harness;
pub mod simplex;
pub mod vlearning;

pub use error::{Error, Result};
