//! Seeded generators. Every stochastic operation draws from a ChaCha8
//! stream selected by `(seed, stream)` so that independent consumers of the
//! same seed never share random numbers.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub(crate) const STREAM_RCF_WEIGHTS: u64 = 1;
pub(crate) const STREAM_PATCH_POSITIONS: u64 = 2;
pub(crate) const STREAM_PATCH_SELECTION: u64 = 3;
pub(crate) const STREAM_SYNTHETIC: u64 = 4;

pub(crate) fn seeded(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
