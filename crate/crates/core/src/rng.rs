//! Seeded random streams.
//!
//! Every consumer derives its own ChaCha stream from `(master seed, tag,
//! index)`, so results do not depend on evaluation order or thread schedule.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Stream tags. Distinct tags never share key material.
pub mod tag {
    pub const SENSORS: u64 = 1;
    pub const TRAIN: u64 = 2;
    pub const VAL: u64 = 3;
    pub const TEST: u64 = 4;
    pub const INIT: u64 = 5;
    pub const SHUFFLE: u64 = 6;
    pub const DROPOUT: u64 = 7;
    pub const FOLDS: u64 = 8;
    pub const SWEEP: u64 = 9;
}

pub fn stream(seed: u64, tag: u64, index: u64) -> StreamRng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&tag.to_le_bytes());
    key[16..24].copy_from_slice(&index.to_le_bytes());
    ChaCha8Rng::from_seed(key)
}
