//! Reproducible random streams.
//!
//! Every consumer derives a ChaCha8 generator from a master seed and a stream
//! id, so results do not depend on scheduling or thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Generator for `(master, stream)`. Distinct streams are independent.
pub fn stream(master: u64, stream: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(stream);
    rng
}

/// Derives a sub-seed, e.g. one per sweep point.
pub fn derive_seed(master: u64, tag: u64) -> u64 {
    use rand::RngCore;
    let mut rng = ChaCha8Rng::seed_from_u64(master ^ 0x9E37_79B9_7F4A_7C15);
    rng.set_stream(tag);
    rng.next_u64()
}
