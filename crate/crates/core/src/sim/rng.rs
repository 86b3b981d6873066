//! Seeded random source for the simulations.
//!
//! The generator is ChaCha20 (`rand_chacha::ChaCha20Rng`) keyed with the
//! 64-bit seed in little-endian order in the first eight key bytes and zeros
//! elsewhere. Derived draws:
//!
//! * uniform on `[0, 1)`: `(next_u64 >> 11) · 2⁻⁵³`;
//! * standard normal: Box–Muller, cosine branch only, from two consecutive
//!   uniforms `u1, u2` as `sqrt(-2 ln(1 - u1)) · cos(2π u2)`.
//!
//! Each normal consumes exactly two `u64` words, so the stream position
//! depends only on the number of draws.

use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};

#[derive(Debug, Clone)]
pub struct SimRng {
    inner: ChaCha20Rng,
}

impl SimRng {
    pub fn new(seed: u64) -> Self {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&seed.to_le_bytes());
        Self {
            inner: ChaCha20Rng::from_seed(key),
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform on `[0, 1)` with 53 random bits.
    pub fn uniform(&mut self) -> f64 {
        (self.inner.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on `[lo, hi]`; returns `lo` exactly when `lo == hi`.
    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        let u = self.uniform();
        if lo == hi {
            lo
        } else {
            (lo + (hi - lo) * u).min(hi)
        }
    }

    pub fn standard_normal(&mut self) -> f64 {
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }
}
