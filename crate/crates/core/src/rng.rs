//! Seed derivation shared by every stochastic stage.
//!
//! Each mask, replicate and region gets its own stream derived from the
//! master seed, so results do not depend on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StageRng = ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes `parts` into `seed`. Order matters.
pub fn derive_seed(seed: u64, parts: &[u64]) -> u64 {
    parts
        .iter()
        .fold(splitmix64(seed), |acc, &p| splitmix64(acc ^ splitmix64(p)))
}

/// FNV-1a hash of a string, for deriving seeds from names.
pub fn hash_str(s: &str) -> u64 {
    s.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

pub fn stream(seed: u64, parts: &[u64]) -> StageRng {
    StageRng::seed_from_u64(derive_seed(seed, parts))
}

/// Stream labels, so different consumers of the same seed never collide.
pub mod tag {
    pub const SELECT: u64 = 0x005e_1ec7;
    pub const PLACE: u64 = 0x91ace;
    pub const EDIT: u64 = 0xed17;
    pub const REGIME: u64 = 0x004e_613e;
    pub const PATCHES: u64 = 0x9a7c;
    pub const MULTISCALE: u64 = 0x3a1e;
}
