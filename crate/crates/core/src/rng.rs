//! Seeded randomness. A single user seed fans out into independent
//! ChaCha streams, one per consumer, so adding a consumer never shifts the
//! draws of another.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const STREAM_CARE_NO: u64 = 1;
pub const STREAM_GENERATOR: u64 = 2;
pub const STREAM_GENERATOR_GROUPS: u64 = 6;
pub const STREAM_GENERATOR_BUDGETS: u64 = 7;
pub const STREAM_GENERATOR_TAU: u64 = 8;
pub const STREAM_RANPRI: u64 = 3;
pub const STREAM_RRAFL: u64 = 4;
pub const STREAM_TRIALS: u64 = 5;

pub fn stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Derived per-item seed (trial `k` of a sweep, say), stable across runs.
pub fn derive(seed: u64, stream: u64, index: u64) -> u64 {
    let mut z = seed ^ stream.rotate_left(32) ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    // splitmix64 finaliser
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
