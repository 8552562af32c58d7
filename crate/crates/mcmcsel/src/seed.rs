//! Deterministic seed derivation.
//!
//! One master seed governs a whole run. Every consumer (reference chain,
//! per-strategy ensembles, individual chains) gets its own stream derived
//! from `(master, label, index)`, so results do not depend on scheduling
//! or on the number of worker threads.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// 64-bit finalizer from the splitmix64 generator.
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive a child seed from a master seed, a purpose label and an index.
pub fn derive_seed(master: u64, label: &str, index: u64) -> u64 {
    let mut h = mix(master ^ 0x9E37_79B9_7F4A_7C15);
    for &b in label.as_bytes() {
        h = mix(h ^ u64::from(b).wrapping_mul(0x0100_0000_01B3));
    }
    mix(h ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// FNV-1a hash of a string, used to fold structured content into a seed label.
pub fn fnv1a(s: &str) -> u64 {
    let mut h: u64 = 0xCBF2_9CE4_8422_2325;
    for &b in s.as_bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01B3);
    }
    h
}

/// Fixed, portable generator for a derived seed.
pub fn rng_from(seed: u64) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(seed)
}
