//! Seeded, counter-based pseudorandomness.
//!
//! Explicit configurations must be identical in every implementation, so the
//! generator is pinned: SplitMix64 (Steele, Lea, Flood 2014) used both as a
//! stream and as a hash of site coordinates.

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Hash of (seed, coordinates): h₀ = splitmix(seed), h_{i+1} = splitmix(h_i ⊕ c_i).
pub fn site_hash(seed: u64, coords: &[i64]) -> u64 {
    coords
        .iter()
        .fold(splitmix64(seed), |h, &c| splitmix64(h ^ c as u64))
}

/// Maps a 64-bit hash onto {0, …, n−1} by multiply-shift.
#[inline]
pub fn reduce(hash: u64, n: usize) -> usize {
    ((hash as u128 * n as u128) >> 64) as usize
}

/// Sequential SplitMix64 stream.
#[derive(Clone, Debug)]
pub struct SplitMix {
    state: u64,
}

impl SplitMix {
    pub fn new(seed: u64) -> Self {
        SplitMix { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    pub fn below(&mut self, n: usize) -> usize {
        reduce(self.next_u64(), n)
    }

    /// Uniform in [0, 1) with 53 bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_values() {
        // first outputs of the reference SplitMix64 stream for seed 0
        let mut s = SplitMix::new(0);
        assert_eq!(s.next_u64(), 0xE220_A839_7B1D_CDAF);
        assert_eq!(s.next_u64(), 0x6E78_9E6A_A1B9_65F4);
        assert_eq!(splitmix64(0), 0xE220_A839_7B1D_CDAF);
    }

    #[test]
    fn reduce_stays_in_range() {
        let mut s = SplitMix::new(7);
        for _ in 0..1000 {
            assert!(s.below(3) < 3);
            let x = s.next_f64();
            assert!((0.0..1.0).contains(&x));
        }
    }
}
