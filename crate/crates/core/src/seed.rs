//! Deterministic sub-seed derivation.
//!
//! Every random choice in the crate flows from one master seed. Sub-seeds are
//! derived by fixed mixing of (master, purpose tag, index), so results are
//! independent of evaluation order and stable across runs.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Derives a sub-seed from a master seed, a purpose tag, and an index.
pub fn derive_seed(master: u64, tag: &str, index: u64) -> u64 {
    let mut h = fnv1a(tag.as_bytes());
    h ^= master;
    h = splitmix64(h);
    h ^= index.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    splitmix64(h)
}

/// RNG seeded from [`derive_seed`].
pub fn rng_for(master: u64, tag: &str, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, tag, index))
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash = 0xCBF2_9CE4_8422_2325u64;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01B3);
    }
    hash
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}
