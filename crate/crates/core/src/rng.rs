//! Seeded random streams.
//!
//! Every stochastic routine takes an explicit 64-bit seed and builds its own
//! [`Stream`] (ChaCha8, a counter-based generator). Independent sub-streams
//! are derived with [`derive_seed`], which folds a list of integer tags into
//! the parent seed through the SplitMix64 finaliser:
//!
//! ```text
//! s = parent
//! for tag in tags: s = splitmix64(s ^ splitmix64(tag + GOLDEN))
//! ```
//!
//! so `derive_seed(seed, &[case, replicate])` always names the same stream.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Stream = ChaCha8Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive a child seed from `parent` and a path of tags.
pub fn derive_seed(parent: u64, tags: &[u64]) -> u64 {
    tags.iter()
        .fold(parent, |s, &t| splitmix64(s ^ splitmix64(t.wrapping_add(GOLDEN))))
}

/// Generator for a seed.
pub fn stream(seed: u64) -> Stream {
    ChaCha8Rng::seed_from_u64(seed)
}
