//! Deterministic stream derivation.
//!
//! Every random draw in a run comes from a ChaCha stream keyed by
//! `(seed, stream kind, index)`. Replications can therefore run in any order
//! or on any number of threads and still produce identical results, and two
//! runs that share a seed consume identical truth/context/outcome randomness
//! regardless of which policy is being simulated.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Role a derived stream plays inside a replication.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StreamKind {
    /// Truth-weight draws.
    Truth = 1,
    /// Synthetic context generation.
    Contexts = 2,
    /// Pre-drawn outcome uniforms.
    Outcomes = 3,
    /// Policy-side randomness (tie breaks, posterior draws, explore picks).
    Policy = 4,
    /// Cross-validation fold shuffling.
    Folds = 5,
}

/// Derive an independent generator for `(seed, kind, index)`.
pub fn derive_rng(seed: u64, kind: StreamKind, index: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&(kind as u64).to_le_bytes());
    key[16..24].copy_from_slice(&index.to_le_bytes());
    ChaCha8Rng::from_seed(key)
}
