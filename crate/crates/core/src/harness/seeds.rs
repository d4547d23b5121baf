//! Counter-based seed splitting.
//!
//! Every random stream is a ChaCha8 generator keyed by the little-endian
//! bytes of `(base seed, replicate, role)`. Streams for different tuples are
//! independent, and adding replicates or roles never shifts existing ones.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    /// Transitions and reward noise.
    Environment,
    /// One learning agent's action draws.
    Agent(usize),
    /// The common seed for certified-policy and time-index draws.
    Shared,
    /// Game generation for families that take a seed.
    Game,
    /// One agent's action draws while executing the certified policy.
    Replay(usize),
}

impl Role {
    fn code(self) -> u64 {
        match self {
            Role::Environment => 0,
            Role::Shared => 1,
            Role::Game => 2,
            Role::Agent(i) => (1 << 16) + i as u64,
            Role::Replay(i) => (2 << 16) + i as u64,
        }
    }
}

pub fn stream(base: u64, replicate: usize, role: Role) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&base.to_le_bytes());
    key[8..16].copy_from_slice(&(replicate as u64).to_le_bytes());
    key[16..24].copy_from_slice(&role.code().to_le_bytes());
    ChaCha8Rng::from_seed(key)
}

/// A 64-bit seed for APIs that take one.
pub fn derive_seed(base: u64, replicate: usize, role: Role) -> u64 {
    stream(base, replicate, role).next_u64()
}
