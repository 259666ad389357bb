//! Deterministic seeding helpers.
//!
//! Every random choice in the crate flows from a `u64` seed through
//! [`ChaCha8Rng`], whose stream is stable across platforms and releases.
//! Sub-seeds are derived by hashing a parent seed together with a label and
//! indices, so independent consumers never share a stream.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// Incremental FNV-1a hasher with a splitmix64 finalizer.
#[derive(Debug, Clone)]
pub struct SeedHasher(u64);

impl Default for SeedHasher {
    fn default() -> Self {
        Self(FNV_OFFSET)
    }
}

impl SeedHasher {
    pub fn new(label: &str) -> Self {
        let mut h = Self::default();
        h.bytes(label.as_bytes());
        h
    }

    pub fn bytes(&mut self, bytes: &[u8]) -> &mut Self {
        for &b in bytes {
            self.0 ^= u64::from(b);
            self.0 = self.0.wrapping_mul(FNV_PRIME);
        }
        // field separator so ("ab","c") and ("a","bc") differ
        self.0 ^= 0xff;
        self.0 = self.0.wrapping_mul(FNV_PRIME);
        self
    }

    pub fn u64(&mut self, v: u64) -> &mut Self {
        self.bytes(&v.to_le_bytes())
    }

    pub fn i64(&mut self, v: i64) -> &mut Self {
        self.bytes(&v.to_le_bytes())
    }

    pub fn str(&mut self, s: &str) -> &mut Self {
        self.bytes(s.as_bytes())
    }

    pub fn finish(&self) -> u64 {
        splitmix64(self.0)
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive a child seed from a parent seed, a label and a list of indices.
pub fn derive_seed(parent: u64, label: &str, indices: &[u64]) -> u64 {
    let mut h = SeedHasher::new(label);
    h.u64(parent);
    for &i in indices {
        h.u64(i);
    }
    h.finish()
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Unit-norm vector of `dim` standard-normal draws seeded by `seed`.
pub fn unit_gaussian(seed: u64, dim: usize) -> Vec<f64> {
    let mut rng = rng_from_seed(seed);
    let mut v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect();
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
    v
}
