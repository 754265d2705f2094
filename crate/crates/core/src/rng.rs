//! Seed derivation and portable random sampling.
//!
//! Every random quantity in the crate is drawn from a [`ChaCha8Rng`] stream
//! seeded through [`derive_seed`], so a single root seed pins an entire
//! experiment. Floating-point draws are built directly from `next_u64` rather
//! than through a distributions library, which keeps the byte-level output
//! stable across platforms and dependency upgrades.

pub use rand_chacha::rand_core::{RngCore, SeedableRng};
pub use rand_chacha::ChaCha8Rng;

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100_0000_01b3);
    }
    h
}

/// Derives a child seed from `(root, purpose tag, index)`.
///
/// Defined as `splitmix64(splitmix64(root ^ fnv1a64(tag)) + index)`; distinct
/// tags and indices give statistically independent streams.
pub fn derive_seed(root: u64, tag: &str, index: u64) -> u64 {
    splitmix64(splitmix64(root ^ fnv1a64(tag.as_bytes())).wrapping_add(index))
}

/// A ChaCha8 stream for the given `(root, tag, index)` purpose.
pub fn stream(root: u64, tag: &str, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(root, tag, index))
}

/// Uniform draw on the open interval (0, 1).
///
/// Maps the top 53 bits of `next_u64` onto the midpoints of a 2^53 grid, so
/// neither endpoint can be returned.
pub fn open01(rng: &mut ChaCha8Rng) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

/// Uniform draw on [lo, hi).
pub fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * ((rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64))
}

/// Uniform index in 0..n via the multiply-shift reduction.
pub fn index(rng: &mut ChaCha8Rng, n: usize) -> usize {
    debug_assert!(n > 0);
    ((rng.next_u64() as u128 * n as u128) >> 64) as usize
}

/// Fair coin.
pub fn coin(rng: &mut ChaCha8Rng) -> bool {
    rng.next_u64() & 1 == 1
}
