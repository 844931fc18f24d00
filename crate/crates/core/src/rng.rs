//! Reproducible random streams.
//!
//! Every random draw in a run comes from a [`Stream`] derived from a
//! [`SeedSpec`]: a master seed plus a path of indices such as
//! `[run, iteration, offspring, role]`. The path is folded into a child seed
//! with a SplitMix64 finalizer, and the child seed initializes a
//! xoshiro256++ generator. Gaussian variates use the ziggurat sampler of
//! `rand_distr::StandardNormal`.
//!
//! Both algorithms are fixed, so a `(master_seed, path)` pair replays the
//! same sample sequence on a given platform across versions of this crate.

use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Role tags used as the last path element of per-draw streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u64)]
pub enum DrawRole {
    SigmaMutation = 0,
    PointMutation = 1,
    FitnessNoise = 2,
}

/// A master seed and a hierarchical stream path.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeedSpec {
    pub master_seed: u64,
    pub stream_path: Vec<u64>,
}

impl SeedSpec {
    pub fn new(master_seed: u64) -> Self {
        SeedSpec {
            master_seed,
            stream_path: Vec::new(),
        }
    }

    /// Extends the path by one index.
    pub fn child(&self, index: u64) -> SeedSpec {
        let mut stream_path = Vec::with_capacity(self.stream_path.len() + 1);
        stream_path.extend_from_slice(&self.stream_path);
        stream_path.push(index);
        SeedSpec {
            master_seed: self.master_seed,
            stream_path,
        }
    }

    pub fn role(&self, role: DrawRole) -> SeedSpec {
        self.child(role as u64)
    }

    /// The 64-bit seed this spec hashes to.
    pub fn derived_seed(&self) -> u64 {
        derive_seed(self.master_seed, &self.stream_path)
    }

    pub fn stream(&self) -> Stream {
        Stream::from_seed(self.derived_seed())
    }

    /// Stream for `self.child(extra[0]).child(extra[1])...` without
    /// materializing the intermediate specs.
    pub fn stream_at(&self, extra: &[u64]) -> Stream {
        Stream::from_seed(extend_seed(self.derived_seed(), extra))
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Folds a path into a seed. Path position matters: `[1, 2]` and `[2, 1]`
/// hash differently, and so do `[]` and `[0]`.
pub fn derive_seed(master_seed: u64, path: &[u64]) -> u64 {
    extend_seed(splitmix64(master_seed), path)
}

fn extend_seed(hash: u64, path: &[u64]) -> u64 {
    path.iter().fold(hash, |h, &e| {
        splitmix64(h ^ splitmix64(e ^ 0x6A09_E667_F3BC_C909))
    })
}

/// A single-owner pseudo-random stream.
#[derive(Debug, Clone)]
pub struct Stream {
    rng: Xoshiro256PlusPlus,
}

impl Stream {
    pub fn from_seed(seed: u64) -> Self {
        Stream {
            rng: Xoshiro256PlusPlus::seed_from_u64(seed),
        }
    }

    pub fn gaussian_scalar(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    /// `d` independent standard normal coordinates, drawn in order.
    pub fn gaussian_vector(&mut self, d: usize) -> Result<Vec<f64>> {
        if d == 0 {
            return Err(Error::InvalidDimension(d));
        }
        let mut v = vec![0.0; d];
        self.fill_gaussian(&mut v);
        Ok(v)
    }

    pub fn fill_gaussian(&mut self, out: &mut [f64]) {
        for x in out {
            *x = self.rng.sample(StandardNormal);
        }
    }

    /// Uniform on `[lo, hi)`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.rng.random::<f64>()
    }

    pub fn rng_mut(&mut self) -> &mut Xoshiro256PlusPlus {
        &mut self.rng
    }
}
