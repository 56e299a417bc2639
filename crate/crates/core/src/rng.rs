//! Seedable, splittable random streams.
//!
//! Every stochastic routine takes an explicit [`RngStream`]. Streams are
//! ChaCha8 generators; children are derived by hashing the parent seed with a
//! label, so a Monte-Carlo trial gets the same randomness no matter which
//! thread runs it or in what order.

use rand::RngCore;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

#[derive(Clone, Debug)]
pub struct RngStream {
    seed: [u8; 32],
    inner: ChaCha8Rng,
}

impl RngStream {
    pub fn seeded(seed: u64) -> Self {
        let mut h = Sha256::new();
        h.update(b"nlqc-root");
        h.update(seed.to_le_bytes());
        Self::from_seed(h.finalize().into())
    }

    fn from_seed(seed: [u8; 32]) -> Self {
        Self { seed, inner: ChaCha8Rng::from_seed(seed) }
    }

    /// Independent child stream, a pure function of this stream's seed and
    /// `label` (not of how much of this stream has been consumed).
    pub fn split(&self, label: u64) -> Self {
        let mut h = Sha256::new();
        h.update(self.seed);
        h.update(label.to_le_bytes());
        Self::from_seed(h.finalize().into())
    }

    /// Child stream for a named purpose, e.g. `"restart"`.
    pub fn split_named(&self, name: &str, label: u64) -> Self {
        let mut h = Sha256::new();
        h.update(self.seed);
        h.update(name.as_bytes());
        h.update([0u8]);
        h.update(label.to_le_bytes());
        Self::from_seed(h.finalize().into())
    }

    /// Uniform draw from `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        (self.inner.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform draw from `0..n`.
    pub fn below(&mut self, n: usize) -> usize {
        use rand::Rng;
        self.random_range(0..n)
    }

    /// Index drawn from nonnegative weights summing to `total`.
    pub fn weighted_index(&mut self, weights: &[f64], total: f64) -> usize {
        let target = self.uniform() * total;
        let mut acc = 0.0;
        let mut last_positive = 0;
        for (k, &w) in weights.iter().enumerate() {
            if w <= 0.0 {
                continue;
            }
            acc += w;
            last_positive = k;
            if target < acc {
                return k;
            }
        }
        last_positive
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}
