//! Seed derivation. Every random stream is keyed by where it is used
//! (run, subject, channel) so results never depend on scheduling order.

use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325u64, |h, &b| {
        (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

/// Mixes an integer key into a parent seed.
pub fn derive(parent: u64, key: u64) -> u64 {
    splitmix64(parent ^ splitmix64(key))
}

/// Mixes a string key (a subject id) into a parent seed.
pub fn derive_str(parent: u64, key: &str) -> u64 {
    derive(parent, fnv1a(key.as_bytes()))
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distinct_keys_distinct_seeds() {
        assert_ne!(derive(1, 0), derive(1, 1));
        assert_ne!(derive_str(7, "a"), derive_str(7, "b"));
        assert_eq!(derive_str(7, "a"), derive_str(7, "a"));
    }
}
