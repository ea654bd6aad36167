//! Fully specified pseudo-random generator for reproducible dart throwing.
//!
//! The seed is expanded with one SplitMix64 step (increment
//! `0x9E3779B97F4A7C15`, multipliers `0xBF58476D1CE4E5B9` and
//! `0x94D049BB133111EB`, shifts 30/27/31), then the stream is xorshift64*
//! (shifts 12, 25, 27; multiplier `0x2545F4914F6CDD1D`). Bounded draws use the
//! multiply-shift reduction `(x * n) >> 64`. Any implementation following these
//! constants reproduces the same manifests.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

#[derive(Clone, Debug)]
pub struct XorShift64Star {
    state: u64,
}

impl XorShift64Star {
    pub fn new(seed: u64) -> Self {
        let mut z = seed.wrapping_add(GOLDEN);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^= z >> 31;
        // xorshift has a fixed point at zero
        Self { state: if z == 0 { GOLDEN } else { z } }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        let mut x = self.state;
        x ^= x >> 12;
        x ^= x << 25;
        x ^= x >> 27;
        self.state = x;
        x.wrapping_mul(0x2545_F491_4F6C_DD1D)
    }

    /// Value in `0..n`. `n` must be positive.
    #[inline]
    pub fn below(&mut self, n: usize) -> usize {
        debug_assert!(n > 0);
        ((u128::from(self.next_u64()) * n as u128) >> 64) as usize
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frozen_stream() {
        // Reference values from an independent evaluation of the documented recurrences.
        let mut r = XorShift64Star::new(0);
        let first: [u64; 3] = [r.next_u64(), r.next_u64(), r.next_u64()];
        assert_eq!(first, FROZEN_SEED0);
    }

    #[test]
    fn bounded_draws_stay_in_range() {
        let mut r = XorShift64Star::new(42);
        let mut seen = [false; 7];
        for _ in 0..1000 {
            let v = r.below(7);
            assert!(v < 7);
            seen[v] = true;
        }
        assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn seeds_give_distinct_streams() {
        let a: u64 = XorShift64Star::new(1).next_u64();
        let b: u64 = XorShift64Star::new(2).next_u64();
        assert_ne!(a, b);
    }

    const FROZEN_SEED0: [u64; 3] = [0x7bbc_b40d_5506_82d0, 0xde7f_e413_d00c_c9fd, 0xb3c6_3835_3c66_8c91];
}
