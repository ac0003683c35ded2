//! Reproducible per-path noise streams.
//!
//! Every random number in a run is drawn from a counter-based generator
//! keyed by the master seed, with the 64-bit stream index carrying the path
//! number. Paths are the unit of parallelism, so any thread schedule
//! produces bit-identical ensembles: stream p always yields the same
//! sequence no matter which worker consumes it.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Independent generator for one path of one run.
pub fn path_rng(master_seed: u64, path: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(path);
    rng
}
