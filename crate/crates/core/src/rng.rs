//! The fixed, versioned PRNG behind every random draw in the pipeline.
//!
//! Reproducibility contract: a 64-bit seed is expanded to a 256-bit ChaCha12
//! key with splitmix64, and uniform doubles take the top 53 bits of one
//! 64-bit output. Both choices are frozen; changing either invalidates
//! recorded results, so outputs carry [`PRNG_ID`].

use rand_chacha::ChaCha12Rng;
use rand_core::{RngCore, SeedableRng};

pub const PRNG_ID: &str = "chacha12/splitmix64-seed/u53-uniform/v1";

/// Expand a 64-bit seed into a full ChaCha key via splitmix64.
pub fn seeded_rng(seed: u64) -> ChaCha12Rng {
    let mut key = [0u8; 32];
    let mut x = seed;
    for chunk in key.chunks_exact_mut(8) {
        x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = x;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^= z >> 31;
        chunk.copy_from_slice(&z.to_le_bytes());
    }
    ChaCha12Rng::from_seed(key)
}

/// Uniform double in [0, 1) carrying 53 random bits.
pub fn next_unit_f64(rng: &mut impl RngCore) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_stream() {
        let mut a = seeded_rng(42);
        let mut b = seeded_rng(42);
        for _ in 0..64 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn different_seeds_diverge() {
        let mut a = seeded_rng(42);
        let mut b = seeded_rng(43);
        let same = (0..16).all(|_| a.next_u64() == b.next_u64());
        assert!(!same);
    }

    #[test]
    fn unit_doubles_stay_in_range() {
        let mut rng = seeded_rng(7);
        for _ in 0..10_000 {
            let x = next_unit_f64(&mut rng);
            assert!((0.0..1.0).contains(&x));
        }
    }
}
