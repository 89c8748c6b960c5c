//! Seeded randomness.
//!
//! Every stochastic step in the crate draws from a `ChaCha8Rng` (counter-based,
//! portable) seeded through [`rng`]. Independent streams are obtained from one
//! user seed with [`derive_seed`], a SplitMix64 mix of the seed and a stream id,
//! so results never depend on the order in which parallel tasks run.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// Stream ids used when one top-level seed drives several analyses.
pub mod stream {
    /// Shared by both probe kinds so they see the same folds.
    pub const PROBE: u64 = 1;
    pub const MI_JITTER: u64 = 3;
    pub const DCI_FOLDS: u64 = 4;
    pub const SYNTH_FACTORS: u64 = 10;
    pub const SYNTH_NOISE: u64 = 11;
    pub const SYNTH_ROTATION: u64 = 12;
    pub const SYNTH_REPR: u64 = 13;
}

/// SplitMix64 finalizer.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive the seed of sub-stream `stream` from `seed`.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    splitmix64(seed ^ splitmix64(stream.wrapping_add(0x5EED)))
}

pub fn rng(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Fisher-Yates permutation of `0..n`.
pub fn permutation(n: usize, seed: u64) -> Vec<usize> {
    use rand::Rng as _;
    let mut rng = rng(seed);
    let mut idx: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.random_range(0..=i);
        idx.swap(i, j);
    }
    idx
}

/// FNV-1a over the bit patterns of a column, used to key per-column jitter.
pub(crate) fn hash_values(values: &[f64]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for v in values {
        for b in v.to_bits().to_le_bytes() {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
    }
    h
}
