//! Seeded random streams. Every stream is a ChaCha8 generator keyed by the
//! master seed and selected by a 64-bit stream id, so streams for different
//! work units are independent and reproducible regardless of scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Stream reserved for variance pre-estimation passes.
pub const VARIANCE_STREAM: u64 = u64::MAX;

pub fn stream(master_seed: u64, stream_id: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(stream_id);
    rng
}

/// Stream id for replicate `rep` of grid point `n_index`.
pub fn replicate_stream_id(n_index: usize, rep: usize) -> u64 {
    ((n_index as u64) << 32) | (rep as u64 & 0xffff_ffff)
}
