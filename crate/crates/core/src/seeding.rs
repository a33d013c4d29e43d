//! Seed splitting for reproducible, independently schedulable random streams.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The random stream type used throughout the crate.
pub type LabRng = ChaCha8Rng;

/// Returns the stream for `(master_seed, stream_id)`.
///
/// Streams with distinct ids never overlap, so blocks or trials that each own
/// one stream may be evaluated in any order (or concurrently) without changing
/// results.
pub fn stream(master_seed: u64, stream_id: u64) -> LabRng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(stream_id);
    rng
}
