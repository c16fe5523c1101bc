//! Seeded random streams. A `(seed, trial, purpose)` triple names one
//! independent ChaCha8 stream, so trials can run in any order or in parallel
//! and still reproduce bit-for-bit.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// What a stream is used for within a trial.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u64)]
pub enum StreamPurpose {
    Adversary = 0,
    Sampling = 1,
    Noise = 2,
    Auxiliary = 3,
}

pub fn stream(seed: u64, trial: u64, purpose: StreamPurpose) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial << 2 | purpose as u64);
    rng
}
