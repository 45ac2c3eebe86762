//! The single source of randomness for sampling.
//!
//! `SeededRng::new(seed)` is ChaCha8 keyed by the 32-byte key whose first
//! eight bytes are `seed` in little-endian order and whose remaining bytes are
//! zero (stream 0, counter 0). A uniform double is `(next_u64 >> 11) * 2^-53`.
//! Every derived sampler below is a fixed arithmetic function of that stream,
//! so another language with a ChaCha8 implementation reproduces the samples.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::C64;

#[derive(Debug, Clone)]
pub struct SeededRng {
    inner: ChaCha8Rng,
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&seed.to_le_bytes());
        SeededRng { inner: ChaCha8Rng::from_seed(key) }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `[-1, 1)`.
    pub fn symmetric_unit(&mut self) -> f64 {
        2.0 * self.uniform() - 1.0
    }

    /// Real and imaginary parts independently uniform in `[-r, r)`.
    pub fn complex_in(&mut self, r: f64) -> C64 {
        let re = r * self.symmetric_unit();
        let im = r * self.symmetric_unit();
        C64::new(re, im)
    }

    /// Uniform integer in `[lo, hi]`.
    pub fn int_in(&mut self, lo: i64, hi: i64) -> i64 {
        let span = (hi - lo + 1) as u64;
        lo + (self.next_u64() % span) as i64
    }
}
