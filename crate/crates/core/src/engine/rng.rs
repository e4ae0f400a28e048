//! Stream derivation for reproducible replicas.
//!
//! A run is identified by `(seed, replica)`. The seed keys a ChaCha8 generator
//! and the replica id selects its 64-bit stream, so replicas are independent
//! and any subset can be recomputed alone, in any order, on any thread.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

pub fn replica_rng(seed: u64, replica: u64) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replica);
    rng
}
