//! SplitMix64 stream used by every randomized component.
//!
//! The generator and the two derived draws (bounded integer and unit real)
//! are fixed bit-for-bit so that seeded corpora and randomized runs can be
//! reproduced by any other implementation.

/// SplitMix64 generator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform integer in `0..n` by 128-bit multiply-shift. `n == 0` yields 0.
    #[inline]
    pub fn below(&mut self, n: u64) -> u64 {
        ((u128::from(self.next_u64()) * u128::from(n)) >> 64) as u64
    }

    /// Uniform integer in the inclusive range `lo..=hi`.
    #[inline]
    pub fn range_inclusive(&mut self, lo: u64, hi: u64) -> u64 {
        debug_assert!(lo <= hi);
        lo + self.below(hi - lo + 1)
    }

    /// Uniform real computed as `next_u64 / 2^64`.
    ///
    /// The conversion to `f64` rounds, so outputs within 2^10 of `u64::MAX`
    /// map to exactly 1.0 (probability 2^-54). Callers treat the value as a
    /// point of `[0, 1]`.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        // 2^-64
        const SCALE: f64 = 1.0 / 18_446_744_073_709_551_616.0;
        self.next_u64() as f64 * SCALE
    }
}
