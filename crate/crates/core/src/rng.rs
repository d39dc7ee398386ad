//! Seed derivation. Every random stream in the crate is a ChaCha8 generator
//! seeded from a base seed and a stream label, so that adding a consumer
//! never shifts the draws of another.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

/// SplitMix64 finaliser; decorrelates nearby seeds.
pub fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn derive(seed: u64, stream: u64) -> u64 {
    mix(mix(seed) ^ stream.wrapping_mul(0xA24B_AED4_963E_E407))
}

pub fn stream(seed: u64, stream: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(derive(seed, stream))
}

pub mod streams {
    pub const WIND: u64 = 1;
    pub const ORIENTATION: u64 = 2;
    pub const LAYOUT: u64 = 3;
    pub const POLICY_INIT: u64 = 4;
    pub const VALUE_INIT: u64 = 5;
    pub const ACTIONS: u64 = 6;
    pub const SHUFFLE: u64 = 7;
    pub const ENV: u64 = 8;
    pub const PREDICTOR_INIT: u64 = 9;
    pub const DATASET: u64 = 10;
    pub const INFERENCE: u64 = 11;
}
