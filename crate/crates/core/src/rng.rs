//! Seeded random streams.
//!
//! Independent work items (sentences, bootstrap resamples, corpus sides)
//! draw from their own ChaCha stream so results do not depend on the order
//! in which rayon schedules them.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Default seed used when the caller does not pick one.
pub const DEFAULT_SEED: u64 = 1234;

/// Random generator for `stream` under the master `seed`.
pub fn stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
