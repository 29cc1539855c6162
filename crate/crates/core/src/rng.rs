//! Seeded randomness.
//!
//! Every random choice in the crate draws from ChaCha8 seeded through
//! [`seeded`]. Independent sub-streams (one per fold, per Monte Carlo trial,
//! per boosting run) are separated with ChaCha's 64-bit stream selector, so
//! parallel and sequential execution consume identical random numbers.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// Stream tags keep unrelated consumers of the same seed apart.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    DataSplit = 1,
    Folds = 2,
    IcpSplit = 3,
    Boosting = 4,
    Trial = 5,
    Synthetic = 6,
}

/// A generator for `(seed, stream, index)`.
pub fn seeded(seed: u64, stream: Stream, index: u64) -> Rng {
    let mut rng = Rng::seed_from_u64(seed);
    rng.set_stream(((stream as u64) << 48) ^ index);
    rng
}
