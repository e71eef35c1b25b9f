//! Seed management for reproducible, parallel simulation runs.
//!
//! Every random quantity in the crate is drawn from a [`ChaCha8Rng`] keyed by
//! a user-supplied `u64` seed. Independent sub-streams (one per replication,
//! one per cell, one for the reference solution) are carved out of the same
//! key via ChaCha's stream counter, so parallel work never shares or races a
//! generator and any stream can be reproduced in isolation.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream id reserved for reference-solution draws, far outside the
/// `(cell, replication)` stream space used by simulation studies.
pub const REFERENCE_STREAM: u64 = u64::MAX;

/// RNG for single-shot draws: stream 0 of the given seed.
pub fn master_rng(seed: u64) -> ChaCha8Rng {
    stream_rng(seed, 0)
}

/// RNG for the sub-stream `stream` of the given seed.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Stream id for one replication of one simulation cell.
///
/// Cells are keyed by the complete-case sample size only, so cells that share
/// `n_complete` see identical complete-sample draws across different
/// auxiliary sizes (common random numbers across the tau axis), while
/// replications remain mutually independent.
pub fn replication_stream(n_complete: usize, replication: usize) -> u64 {
    ((n_complete as u64) << 32) | replication as u64
}
