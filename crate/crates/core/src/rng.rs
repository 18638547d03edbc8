//! Seeded random streams.
//!
//! Every stochastic operation draws from a [`Stream`], a thin wrapper over
//! ChaCha8 (`rand_chacha::ChaCha8Rng`). The conversions from raw 64-bit words
//! to uniforms, indices and normals are implemented here rather than taken
//! from `rand`, so output streams only depend on the ChaCha8 keystream.
//!
//! Independent sub-streams are derived with [`derive_seed`], which mixes the
//! parent seed and a stream index through SplitMix64:
//!
//! ```text
//! child(seed, i) = splitmix64(seed ^ splitmix64(i + 0x9E3779B97F4A7C15))
//! ```

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

/// 64-bit seed of a random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RngSeed(pub u64);

impl RngSeed {
    /// Seed of the `index`-th child stream.
    pub fn child(self, index: u64) -> RngSeed {
        RngSeed(derive_seed(self.0, index))
    }

    /// Seed of a nested child stream, following `path` from the root.
    pub fn descend(self, path: &[u64]) -> RngSeed {
        path.iter().fold(self, |s, &i| s.child(i))
    }

    pub fn stream(self) -> Stream {
        Stream::new(self)
    }
}

impl From<u64> for RngSeed {
    fn from(v: u64) -> Self {
        RngSeed(v)
    }
}

impl std::fmt::Display for RngSeed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn derive_seed(seed: u64, index: u64) -> u64 {
    splitmix64(seed ^ splitmix64(index.wrapping_add(0x9E37_79B9_7F4A_7C15)))
}

/// A deterministic random stream.
pub struct Stream {
    rng: ChaCha8Rng,
}

impl Stream {
    pub fn new(seed: RngSeed) -> Self {
        Stream {
            rng: ChaCha8Rng::seed_from_u64(seed.0),
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform on [0, 1) with 53 bits of precision.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on (0, 1].
    fn uniform_open0(&mut self) -> f64 {
        ((self.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Index in `0..n` by widening multiply (bias at most n / 2^64).
    pub fn index(&mut self, n: usize) -> usize {
        debug_assert!(n > 0);
        ((self.next_u64() as u128 * n as u128) >> 64) as usize
    }

    /// Standard normal via the Box–Muller transform; consumes two uniforms.
    pub fn normal(&mut self) -> f64 {
        let u1 = self.uniform_open0();
        let u2 = self.uniform();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    /// Exponential with unit mean; consumes one uniform.
    pub fn exponential(&mut self) -> f64 {
        -self.uniform_open0().ln()
    }

    /// In-place Fisher–Yates shuffle.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.index(i + 1);
            items.swap(i, j);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_stream() {
        let mut a = RngSeed(42).stream();
        let mut b = RngSeed(42).stream();
        for _ in 0..100 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn children_differ() {
        let s = RngSeed(7);
        assert_ne!(s.child(0), s.child(1));
        assert_ne!(s.child(0), s);
        assert_eq!(s.descend(&[3, 4]), s.child(3).child(4));
    }

    #[test]
    fn uniform_in_range_and_centered() {
        let mut s = RngSeed(1).stream();
        let n = 100_000;
        let mut sum = 0.0;
        for _ in 0..n {
            let u = s.uniform();
            assert!((0.0..1.0).contains(&u));
            sum += u;
        }
        let mean = sum / n as f64;
        // sd of the mean is sqrt(1/12/n) ~ 9e-4
        assert!((mean - 0.5).abs() < 4.0 * (1.0 / 12.0 / n as f64).sqrt());
    }

    #[test]
    fn normal_moments() {
        let mut s = RngSeed(2).stream();
        let n = 100_000;
        let xs: Vec<f64> = (0..n).map(|_| s.normal()).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!(mean.abs() < 4.0 / (n as f64).sqrt());
        // var of sample variance for N(0,1) is 2/(n-1)
        assert!((var - 1.0).abs() < 4.0 * (2.0 / n as f64).sqrt());
    }

    #[test]
    fn shuffle_is_permutation() {
        let mut s = RngSeed(3).stream();
        let mut v: Vec<usize> = (0..50).collect();
        s.shuffle(&mut v);
        let mut sorted = v.clone();
        sorted.sort();
        assert_eq!(sorted, (0..50).collect::<Vec<_>>());
        assert_ne!(v, sorted);
    }
}
