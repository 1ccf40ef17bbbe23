//! Seeded randomness.
//!
//! All random choices go through [`SeededRng`], a ChaCha8 stream cipher used
//! as a counter-based generator: the 64-bit seed is expanded into the 256-bit
//! key, and independent sub-streams are addressed by ChaCha's 64-bit stream
//! id. Integer draws are taken on `u64` ranges so results do not depend on
//! the platform's pointer width.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

#[derive(Debug, Clone)]
pub struct SeededRng {
    inner: ChaCha8Rng,
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        Self {
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Generator for an independent named sub-stream of `seed`.
    pub fn with_stream(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        Self { inner }
    }

    /// Uniform index in `0..n`. Panics if `n == 0`.
    pub fn below(&mut self, n: usize) -> usize {
        assert!(n > 0, "cannot draw from an empty range");
        self.inner.random_range(0..n as u64) as usize
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    pub fn standard_normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.inner)
    }

    /// `k` distinct indices from `0..n` in draw order (partial Fisher-Yates).
    pub fn sample_distinct(&mut self, n: usize, k: usize) -> Vec<usize> {
        assert!(k <= n);
        let mut pool: Vec<usize> = (0..n).collect();
        for i in 0..k {
            let j = i + self.below(n - i);
            pool.swap(i, j);
        }
        pool.truncate(k);
        pool
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_stream() {
        let mut a = SeededRng::new(7);
        let mut b = SeededRng::new(7);
        for _ in 0..100 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn streams_are_independent() {
        let mut a = SeededRng::with_stream(7, 0);
        let mut b = SeededRng::with_stream(7, 1);
        assert_ne!(a.next_u64(), b.next_u64());
    }

    // Frozen first outputs; a change here means selections are no longer
    // reproducible across releases.
    #[test]
    fn frozen_values() {
        let mut r = SeededRng::new(0);
        let draws: Vec<usize> = (0..5).map(|_| r.below(1000)).collect();
        assert_eq!(draws, vec![709, 465, 699, 60, 879]);
        assert_eq!(SeededRng::new(42).next_u64(), 12_578_764_544_318_200_737);
        assert_eq!(
            SeededRng::new(7).sample_distinct(100, 10),
            vec![15, 17, 71, 73, 61, 39, 13, 85, 41, 99]
        );
    }

    #[test]
    fn sample_distinct_is_permutation_when_full() {
        let mut r = SeededRng::new(3);
        let mut s = r.sample_distinct(5, 5);
        s.sort_unstable();
        assert_eq!(s, vec![0, 1, 2, 3, 4]);
    }
}
