//! Deterministic random streams.
//!
//! Every random draw in the crate comes from a ChaCha8 generator seeded
//! with the run seed and switched to a stream chosen by the caller, so
//! results do not depend on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

pub fn stream_rng(seed: u64, stream: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Stream id for item `index` of group `group`.
pub fn stream_id(group: u64, index: u64) -> u64 {
    (group << 32) | (index & 0xffff_ffff)
}
