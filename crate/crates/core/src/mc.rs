//! Monte Carlo bookkeeping: estimates, compensated reduction and
//! counter-style random streams.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Mean, standard error and sample count of a Monte Carlo average.
///
/// For complex samples the standard error is that of the complex mean,
/// `sqrt(sum |x_i - mean|^2 / (n (n - 1)))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: Complex64,
    pub stderr: f64,
    pub n: usize,
}

impl McEstimate {
    pub fn exact(value: Complex64) -> Self {
        Self { mean: value, stderr: 0.0, n: 1 }
    }

    /// Reduces samples in slice order, so the result does not depend on how
    /// the samples were produced.
    pub fn from_samples(samples: &[Complex64]) -> Result<Self> {
        let n = samples.len();
        if n == 0 {
            return Err(Error::TooFewSamples(0));
        }
        let mut sum = NeumaierSum::default();
        for &x in samples {
            sum.add(x);
        }
        let mean = sum.total() / n as f64;
        if n == 1 {
            return Ok(Self { mean, stderr: 0.0, n });
        }
        let mut sq = NeumaierSum::default();
        for &x in samples {
            sq.add(Complex64::new((x - mean).norm_sqr(), 0.0));
        }
        let var = sq.total().re / (n as f64 - 1.0);
        Ok(Self { mean, stderr: (var / n as f64).sqrt(), n })
    }

    pub fn from_real_samples(samples: &[f64]) -> Result<Self> {
        let c: Vec<Complex64> = samples.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self::from_samples(&c)
    }

    /// `|mean - target| <= sigmas * stderr + floor`
    pub fn agrees_with(&self, target: Complex64, sigmas: f64, floor: f64) -> bool {
        (self.mean - target).norm() <= sigmas * self.stderr + floor
    }
}

/// Neumaier-compensated complex summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct NeumaierSum {
    re: (f64, f64),
    im: (f64, f64),
}

fn neumaier_step((sum, comp): (f64, f64), x: f64) -> (f64, f64) {
    let t = sum + x;
    let comp = if sum.abs() >= x.abs() {
        comp + ((sum - t) + x)
    } else {
        comp + ((x - t) + sum)
    };
    (t, comp)
}

impl NeumaierSum {
    pub fn add(&mut self, x: Complex64) {
        self.re = neumaier_step(self.re, x.re);
        self.im = neumaier_step(self.im, x.im);
    }

    pub fn total(&self) -> Complex64 {
        Complex64::new(self.re.0 + self.re.1, self.im.0 + self.im.1)
    }
}

/// Independent stream keyed by `(seed, domain, index, sub)`.
///
/// Each key is a distinct ChaCha key, so streams can be created in any order
/// on any worker and still reproduce the same draws.
pub fn stream(seed: u64, domain: u64, index: u64, sub: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&domain.to_le_bytes());
    key[16..24].copy_from_slice(&index.to_le_bytes());
    key[24..].copy_from_slice(&sub.to_le_bytes());
    ChaCha8Rng::from_seed(key)
}

/// Stream domains, so that different consumers of one seed never overlap.
pub mod domain {
    pub const WHITE_NOISE: u64 = 1;
    pub const TRANSLATED: u64 = 2;
    pub const FINDIM_TARGET: u64 = 3;
    pub const FINDIM_STARTS: u64 = 4;
    pub const WZLG_NOISE: u64 = 5;
    pub const WZLG_STARTS: u64 = 6;
    pub const TEST_FIELDS: u64 = 7;
    pub const LIE_NOISE: u64 = 8;
}

/// Evaluates `f(i)` for `i in 0..n` in parallel and returns the values in
/// index order.
pub fn par_samples<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    (0..n as u64).into_par_iter().map(f).collect()
}

/// Runs `f` on a pool with `workers` threads (0 means the global pool).
pub fn with_workers<R: Send>(workers: usize, f: impl FnOnce() -> R + Send) -> R {
    if workers == 0 {
        return f();
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map(|pool| pool.install(f))
        .expect("thread pool construction")
}
