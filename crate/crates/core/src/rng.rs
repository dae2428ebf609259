//! Deterministic per-replica random streams.
//!
//! Every replica draws from ChaCha8 keyed by the master seed, on a stream
//! number derived from a (family, replica) pair. The same pair always yields
//! the same stream regardless of thread scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Name recorded in output manifests.
pub const GENERATOR_NAME: &str = "ChaCha8Rng (rand_chacha 0.9), stream = family << 40 | replica";

/// Stream families keep independent experiment parts from overlapping.
pub mod family {
    pub const GROWTH_FIRST: u64 = 0;
    pub const GROWTH_SECOND: u64 = 1;
    pub const ROOTS: u64 = 2;
    pub const BOOTSTRAP: u64 = 3;
    pub const LIMIT_LAW: u64 = 4;
    pub const POLYA_POINT: u64 = 5;
    pub const MISC: u64 = 6;
}

/// Random stream for `replica` within `family` under `master_seed`.
pub fn stream(master_seed: u64, family: u64, replica: u64) -> StreamRng {
    assert!(replica < (1 << 40), "replica index too large");
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream((family << 40) | replica);
    rng
}
