//! Seeded random streams.
//!
//! Every chain, annealing run and per-user split draws from its own stream of
//! a single seed, so results do not depend on scheduling or thread count.

use rand::SeedableRng;
pub use rand_chacha::ChaCha8Rng as ChainRng;

pub fn stream_rng(seed: u64, stream: u64) -> ChainRng {
    let mut rng = ChainRng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
