//! Seeded, splittable random streams.
//!
//! Every stream is keyed by a root seed and a path of indices (for example
//! `[experiment, path, interval]`), so a Monte Carlo path draws the same
//! numbers no matter which thread runs it.
//!
//! Draw accounting, per call:
//!
//! | call                      | draws added |
//! |---------------------------|-------------|
//! | `normal`, `gaussian`      | 1           |
//! | `gaussian_vec(d, _)`      | d           |
//! | `uniform`                 | 1           |
//! | `rademacher`              | 1           |
//! | `rademacher_vec(d)`       | d           |
//! | `exponential`             | 1           |
//! | `three_point_uniform`     | 1           |

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Exp1, StandardNormal};

use crate::error::{invalid, Result};
use crate::real::Real;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SeedSpec {
    pub root_seed: u64,
    pub stream_path: Vec<u64>,
}

impl SeedSpec {
    pub fn new(root_seed: u64) -> Self {
        SeedSpec { root_seed, stream_path: Vec::new() }
    }

    pub fn with_path(root_seed: u64, stream_path: &[u64]) -> Self {
        SeedSpec { root_seed, stream_path: stream_path.to_vec() }
    }

    /// Sub-stream one level deeper.
    pub fn child(&self, index: u64) -> Self {
        let mut stream_path = self.stream_path.clone();
        stream_path.push(index);
        SeedSpec { root_seed: self.root_seed, stream_path }
    }

    pub fn stream(&self) -> RandomStream {
        RandomStream::new(self)
    }

    fn key(&self) -> [u8; 32] {
        let mut state = splitmix64(self.root_seed ^ 0x6a09_e667_f3bc_c908);
        for (depth, &p) in self.stream_path.iter().enumerate() {
            let tag = splitmix64(p.wrapping_add((depth as u64 + 1).wrapping_mul(0x9e37_79b9_7f4a_7c15)));
            state = splitmix64(state ^ tag);
        }
        state ^= splitmix64(self.stream_path.len() as u64);
        let mut key = [0u8; 32];
        for chunk in key.chunks_mut(8) {
            state = splitmix64(state);
            chunk.copy_from_slice(&state.to_le_bytes());
        }
        key
    }
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Single-owner random stream. Not shared across threads; derive a new
/// one per path from a [`SeedSpec`] instead.
#[derive(Debug, Clone)]
pub struct RandomStream {
    rng: ChaCha12Rng,
    draws: u64,
}

impl RandomStream {
    pub fn new(seed: &SeedSpec) -> Self {
        RandomStream { rng: ChaCha12Rng::from_seed(seed.key()), draws: 0 }
    }

    pub fn draws(&self) -> u64 {
        self.draws
    }

    #[inline]
    pub fn normal(&mut self) -> f64 {
        self.draws += 1;
        self.rng.sample(StandardNormal)
    }

    /// Centred normal with the given standard deviation. Unchecked hot path.
    #[inline]
    pub fn gaussian<T: Real>(&mut self, std: T) -> T {
        T::lit(self.normal()) * std
    }

    #[inline]
    pub fn uniform(&mut self) -> f64 {
        self.draws += 1;
        self.rng.random::<f64>()
    }

    #[inline]
    pub fn rademacher<T: Real>(&mut self) -> T {
        self.draws += 1;
        if self.rng.random::<bool>() {
            T::one()
        } else {
            -T::one()
        }
    }

    pub fn gaussian_vec<T: Real>(&mut self, d: usize, std: T) -> Result<Vec<T>> {
        if d == 0 {
            return Err(invalid("dimension must be at least 1"));
        }
        if !(std > T::zero()) || !std.is_finite() {
            return Err(invalid(format!("standard deviation must be positive, got {std}")));
        }
        Ok((0..d).map(|_| self.gaussian(std)).collect())
    }

    pub fn rademacher_vec<T: Real>(&mut self, d: usize) -> Result<Vec<T>> {
        if d == 0 {
            return Err(invalid("dimension must be at least 1"));
        }
        Ok((0..d).map(|_| self.rademacher()).collect())
    }

    pub fn exponential<T: Real>(&mut self, rate: T) -> Result<T> {
        if !(rate > T::zero()) || !rate.is_finite() {
            return Err(invalid(format!("rate must be positive, got {rate}")));
        }
        Ok(self.exponential_unchecked(rate))
    }

    #[inline]
    pub(crate) fn exponential_unchecked<T: Real>(&mut self, rate: T) -> T {
        self.draws += 1;
        let e: f64 = self.rng.sample(Exp1);
        T::lit(e) / rate
    }

    /// Uniform over the pairs (1,1), (1,-1), (-1,-1).
    pub fn three_point_uniform<T: Real>(&mut self) -> (T, T) {
        self.draws += 1;
        let one = T::one();
        match self.rng.random_range(0u32..3) {
            0 => (one, one),
            1 => (one, -one),
            _ => (-one, -one),
        }
    }
}
