//! Counter-based random streams.
//!
//! Every trial draws from its own ChaCha stream keyed by `(seed, index)`, so
//! results never depend on which thread ran which trial.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type TrialRng = ChaCha8Rng;

/// The random stream for trial `index` under the global `seed`.
pub fn trial_rng(seed: u64, index: u64) -> TrialRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// A stream for trial `index` of a named sub-experiment, keeping experiments
/// that share a seed statistically independent.
pub fn tagged_rng(seed: u64, tag: u64, index: u64) -> TrialRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    rng.set_stream(index);
    rng
}
