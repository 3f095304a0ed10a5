//! Deterministic random value derivation.
//!
//! Random scores, the validation holdout, masking choices, and epoch shuffle
//! seeds must reproduce bit-for-bit across runs, platforms, and thread
//! counts, so none of them may depend on iteration order or a shared mutable
//! generator. Everything here is a pure function of explicit integer keys,
//! built on the SplitMix64 finalizer.

/// Stream identifiers so that the scoring, holdout, masking, and epoch
/// seeds derived from one master seed never coincide.
pub mod streams {
    pub const SCORE: u64 = 1;
    pub const SPLIT: u64 = 2;
    pub const MASK: u64 = 3;
    pub const EPOCH: u64 = 4;
}

/// SplitMix64 finalizer. Bijective on `u64`.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive an independent seed for a sub-stream of `master`.
///
/// For a fixed master seed, distinct streams map to distinct seeds
/// (both inner steps are bijections of the stream index).
#[inline]
pub fn derive_seed(master: u64, stream: u64) -> u64 {
    mix64(master ^ mix64(stream.wrapping_add(0x243f_6a88_85a3_08d3)))
}

/// A uniform value in [0, 1) that depends only on `(seed, key)`.
///
/// Uses the top 53 bits of the mixed state, so every representable value is
/// an exact multiple of 2^-53.
#[inline]
pub fn unit_from(seed: u64, key: u64) -> f64 {
    (derive_seed(seed, key) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Counter-based generator for the few places that need a sequence of draws
/// (holdout shuffle, mask position sampling). Seeded from `(seed, stream)`,
/// never from global state.
#[derive(Debug, Clone)]
pub struct DetRng {
    state: u64,
}

impl DetRng {
    pub fn new(seed: u64, stream: u64) -> Self {
        DetRng {
            state: derive_seed(seed, stream),
        }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e37_79b9_7f4a_7c15);
        mix64(self.state)
    }

    /// Uniform in [0, 1).
    #[inline]
    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in [0, bound). Lemire's widening-multiply method; unbiased.
    pub fn below(&mut self, bound: u64) -> u64 {
        debug_assert!(bound > 0);
        let mut m = u128::from(self.next_u64()) * u128::from(bound);
        let mut low = m as u64;
        if low < bound {
            let threshold = bound.wrapping_neg() % bound;
            while low < threshold {
                m = u128::from(self.next_u64()) * u128::from(bound);
                low = m as u64;
            }
        }
        (m >> 64) as u64
    }

    /// In-place Fisher-Yates shuffle.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i as u64 + 1) as usize;
            items.swap(i, j);
        }
    }
}
