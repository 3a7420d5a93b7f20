//! Deterministic randomness.
//!
//! Generator membership bits come from the ChaCha8 keystream keyed by the
//! graph seed: element `i` reads bit `i mod 32` of keystream word `i / 32`,
//! so every bit is a pure function of `(seed, i)` no matter in which order or
//! on which thread it is drawn. Per-trial seeds are derived with the
//! SplitMix64 finaliser.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

/// SplitMix64 output function.
#[inline]
pub fn splitmix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of trial `index` under `base_seed`: the `index+1`-th SplitMix64
/// output of a stream started at `base_seed`.
///
/// For a fixed base the map is injective in `index`, since the finaliser is a
/// bijection and the pre-images differ by distinct multiples of an odd
/// constant.
#[inline]
pub fn trial_seed(base_seed: u64, index: u64) -> u64 {
    splitmix64(base_seed.wrapping_add(index.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)))
}

/// Fills `words` with the first `64 * words.len()` keystream bits for `seed`.
pub(crate) fn keystream_bits(seed: u64, words: &mut [u64]) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for w in words.iter_mut() {
        let lo = rng.next_u32() as u64;
        let hi = rng.next_u32() as u64;
        *w = lo | hi << 32;
    }
}

/// The single keystream bit for element `i`, computed by seeking directly.
pub fn inclusion_bit(seed: u64, i: u32) -> bool {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_word_pos((i / 32) as u128);
    rng.next_u32() >> (i % 32) & 1 == 1
}
