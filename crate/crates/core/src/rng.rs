//! Splittable, counter-addressed random number streams.
//!
//! Every operation that consumes randomness takes an explicit [`RngStream`].
//! A stream is addressed by a key derived from a master seed plus a
//! (purpose, index) path, so substreams can be handed to parallel workers in
//! any order and the overall result stays bit-identical: the draw sequence of
//! a substream depends only on its address, never on sibling consumption.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

/// Master seed for a whole experiment; the root of the stream tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MasterSeed(pub u64);

/// splitmix64 finalizer; a cheap 64-bit mixer with full avalanche.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn hash_purpose(purpose: &str) -> u64 {
    // FNV-1a over the purpose tag.
    let mut h: u64 = 0xCBF2_9CE4_8422_2325;
    for b in purpose.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01B3);
    }
    h
}

/// A single-owner random stream. Cloning is deliberately not provided;
/// derive substreams instead.
#[derive(Debug)]
pub struct RngStream {
    key: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    /// Root stream of a seed tree.
    pub fn from_master(seed: MasterSeed) -> Self {
        Self::from_key(mix(seed.0))
    }

    fn from_key(key: u64) -> Self {
        RngStream {
            key,
            rng: ChaCha8Rng::seed_from_u64(key),
        }
    }

    /// Key of this stream; stable address material for derived seeds.
    pub fn key(&self) -> u64 {
        self.key
    }

    /// Derive the key of the `(purpose, index)` child without constructing it.
    pub fn derive_key(&self, purpose: &str, index: u64) -> u64 {
        mix(mix(self.key ^ hash_purpose(purpose)) ^ index)
    }

    /// Child stream addressed by `(purpose, index)`. Derivation reads only the
    /// key, never the generator state, so it is independent of how much this
    /// stream has been consumed.
    pub fn substream(&self, purpose: &str, index: u64) -> RngStream {
        Self::from_key(self.derive_key(purpose, index))
    }

    /// Uniform draw in `[0, 1)`.
    pub fn unit<F: Scalar>(&mut self) -> F {
        F::from_f64_lossy(rand::Rng::random::<f64>(&mut self.rng))
    }

    /// Uniform draw in `[lo, hi)`.
    pub fn uniform<F: Scalar>(&mut self, lo: F, hi: F) -> F {
        lo + (hi - lo) * self.unit::<F>()
    }

    /// Uniform integer in `0..n`. `n` must be positive.
    pub fn below(&mut self, n: u64) -> u64 {
        rand::Rng::random_range(&mut self.rng, 0..n)
    }

    /// Standard normal draw.
    pub fn standard_normal<F: Scalar>(&mut self) -> F {
        let z: f64 = rand::Rng::sample(&mut self.rng, rand_distr::StandardNormal);
        F::from_f64_lossy(z)
    }

    /// Exponential draw with the given rate.
    pub fn exponential<F: Scalar>(&mut self, rate: F) -> F {
        let d = rand_distr::Exp::new(rate.as_f64()).expect("positive rate");
        F::from_f64_lossy(rand::Rng::sample(&mut self.rng, d))
    }

    /// Bernoulli draw.
    pub fn bernoulli(&mut self, p: f64) -> bool {
        rand::Rng::random_bool(&mut self.rng, p.clamp(0.0, 1.0))
    }

    /// `k` distinct indices drawn uniformly from `0..n`, by partial
    /// Fisher-Yates. Order of the result is the draw order.
    pub fn distinct_indices(&mut self, n: usize, k: usize) -> Vec<usize> {
        assert!(k <= n, "cannot draw {k} distinct indices from 0..{n}");
        let mut pool: Vec<usize> = (0..n).collect();
        for i in 0..k {
            let j = i + self.below((n - i) as u64) as usize;
            pool.swap(i, j);
        }
        pool.truncate(k);
        pool
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.rng.fill_bytes(dest);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_address_same_draws() {
        let root = RngStream::from_master(MasterSeed(7));
        let mut a = root.substream("chain", 3);
        let mut b = root.substream("chain", 3);
        let xs: Vec<u64> = (0..8).map(|_| a.next_u64()).collect();
        let ys: Vec<u64> = (0..8).map(|_| b.next_u64()).collect();
        assert_eq!(xs, ys);
    }

    #[test]
    fn derivation_ignores_consumption() {
        let mut root = RngStream::from_master(MasterSeed(7));
        let before = root.derive_key("is", 5);
        let _ = root.next_u64();
        let _ = root.next_u64();
        assert_eq!(before, root.derive_key("is", 5));
    }

    #[test]
    fn siblings_differ() {
        let root = RngStream::from_master(MasterSeed(7));
        let mut a = root.substream("grid", 0);
        let mut b = root.substream("grid", 1);
        let mut c = root.substream("init", 0);
        let (x, y, z) = (a.next_u64(), b.next_u64(), c.next_u64());
        assert_ne!(x, y);
        assert_ne!(x, z);
    }

    #[test]
    fn distinct_indices_are_distinct_and_in_range() {
        let mut s = RngStream::from_master(MasterSeed(11));
        let picked = s.distinct_indices(10, 10);
        let mut sorted = picked.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, (0..10).collect::<Vec<_>>());
        let two = s.distinct_indices(1000, 2);
        assert_ne!(two[0], two[1]);
    }

    #[test]
    fn unit_in_range_f32_and_f64() {
        let mut s = RngStream::from_master(MasterSeed(3));
        for _ in 0..1000 {
            let x: f64 = s.unit();
            let y: f32 = s.unit();
            assert!((0.0..1.0).contains(&x));
            assert!((0.0..1.0).contains(&y));
        }
    }
}
