//! Deterministic seed derivation.
//!
//! Every random stream in a campaign descends from one master seed. Child
//! seeds are produced by [`mix`], which folds each key word into the state
//! with the SplitMix64 finalizer:
//!
//! ```text
//! state = splitmix64(master)
//! for k in keys: state = splitmix64(state ^ splitmix64(k))
//! ```
//!
//! Streams derived this way depend only on `(master, keys)`, so work can be
//! spread across any number of threads without changing results.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream tags, so sibling streams of one run never coincide.
pub mod tag {
    pub const CONDITIONING: u64 = 0xC0;
    pub const RECOMMENDATION: u64 = 0xEC;
    pub const FAILURE: u64 = 0xFA;
    pub const COUNTERFACTUAL: u64 = 0xCF;
    pub const SENSITIVITY: u64 = 0x5E;
    pub const LABELING: u64 = 0x1A;
    pub const POOL: u64 = 0x9001;
}

pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn mix(master: u64, keys: &[u64]) -> u64 {
    keys.iter()
        .fold(splitmix64(master), |state, &k| splitmix64(state ^ splitmix64(k)))
}

/// Seed of bot `bot_index` in week `week`.
pub fn run_seed(master: u64, week: u32, bot_index: u32) -> u64 {
    mix(master, &[week as u64, bot_index as u64])
}

pub fn rng_from(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// 64-bit FNV-1a, used where a stable hash of a string is needed.
pub fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325u64, |h, &b| {
        (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3)
    })
}
