//! Counter-style seed derivation.
//!
//! Every random draw in a simulation is addressed by `(master seed, trial
//! index, step index)`. A trial's stream for step `j` is a ChaCha8 generator
//! keyed by the trial seed with stream id `j`, so the sequence drawn at a
//! given step never depends on how many draws earlier steps consumed or on
//! which worker ran the trial.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream id reserved for per-trial setup draws (true frequency).
pub const SETUP_STREAM: u64 = u64::MAX;

/// Stream id for the initial POVM guesses.
pub const INIT_STREAM: u64 = 0;

/// SplitMix64 finaliser.
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Seed of trial `trial` under `master`.
pub fn trial_seed(master: u64, trial: u64) -> u64 {
    splitmix64(master ^ splitmix64(trial.wrapping_add(0x5851_F42D_4C95_7F2D)))
}

/// Generator for `stream` of the trial keyed by `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
