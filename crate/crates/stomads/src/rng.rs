//! Counter-keyed random number generation.
//!
//! Instead of advancing one shared stream, every consumer builds a fresh
//! ChaCha12 generator from a 32-byte key assembled out of the global seed, a
//! domain tag, and a per-use index (noise: the monotone evaluation counter;
//! poll: the iteration number). Results therefore do not depend on how many
//! draws other parts of the run consumed, which keeps records reproducible
//! under any evaluation schedule.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// Independent key spaces for the different consumers of randomness.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Domain {
    /// Noise draws inside a blackbox evaluation; indexed by call counter.
    Noise = 1,
    /// Poll seed vectors; indexed by iteration number.
    Poll = 2,
}

/// Builds the generator for `(seed, domain, index)`.
pub(crate) fn keyed_rng(seed: u64, domain: Domain, index: u64) -> ChaCha12Rng {
    let mut key = [0u8; 32];
    key[0..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&(domain as u64).to_le_bytes());
    key[16..24].copy_from_slice(&index.to_le_bytes());
    ChaCha12Rng::from_seed(key)
}
