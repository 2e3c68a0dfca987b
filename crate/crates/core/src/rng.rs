//! Seeded random streams.
//!
//! Every stochastic routine derives its generators from a 64-bit master seed
//! and an explicit stream id, so results never depend on thread scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// Generator for `(seed, stream)`. Distinct streams are independent.
pub fn stream(seed: u64, stream: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Combine two stream coordinates into one stream id.
pub fn sub_stream(major: u64, minor: u64) -> u64 {
    // splitmix64 finaliser over the packed pair
    let mut z = major
        .wrapping_mul(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(minor.wrapping_add(0xBF58_476D_1CE4_E5B9));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng as _;

    #[test]
    fn streams_replay_and_differ() {
        let a: Vec<u64> = (0..4).map(|_| stream(7, 1).random()).collect();
        let mut r = stream(7, 1);
        let b: u64 = r.random();
        assert_eq!(a[0], b);
        let mut r2 = stream(7, 2);
        let c: u64 = r2.random();
        assert_ne!(b, c);
        assert_ne!(sub_stream(1, 2), sub_stream(2, 1));
    }
}
