//! White-noise and smoothed Gaussian measures on truncated field spaces.
//!
//! Coefficient convention: under the white-noise measure at scale `t`, every
//! mode is `(a + i b) / t` with `a, b` independent standard normals, so
//! `E|c_k|^2 = 2 / t^2`. This is the normalization under which
//! `E[exp(i Re<φ, σ>)] = exp(-|φ|^2 / (2 t^2))` holds exactly; a standard
//! complex normal (`E|c|^2 = 1`) would be off by a factor of two.
//!
//! The smoothed measure is the pushforward under `(1 - Δ)^{-s}`.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mc::{self, domain, McEstimate};
use crate::spectral::{l2_inner, laplace_symbol, sobolev_norm, FreqIndex, SpectralField};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianSpec {
    /// Truncation `N`.
    pub trunc: usize,
    /// Scale `t > 0`; samples are divided by `t`.
    pub scale: f64,
    /// Smoothing exponent `s >= 0` of the `(1 - Δ)^{-s}` pushforward.
    pub smooth: f64,
    /// Number of independent field components.
    pub rank: usize,
}

impl GaussianSpec {
    pub fn new(trunc: usize, scale: f64, smooth: f64, rank: usize) -> Result<Self> {
        let spec = Self { trunc, scale, smooth, rank };
        spec.validate()?;
        Ok(spec)
    }

    pub fn white_noise(trunc: usize, scale: f64) -> Result<Self> {
        Self::new(trunc, scale, 0.0, 1)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trunc < 1 {
            return Err(Error::OutOfRange(format!("trunc = {} < 1", self.trunc)));
        }
        if !(self.scale > 0.0 && self.scale.is_finite()) {
            return Err(Error::OutOfRange(format!("scale = {} must be positive", self.scale)));
        }
        if !(self.smooth >= 0.0 && self.smooth.is_finite()) {
            return Err(Error::OutOfRange(format!("smooth = {} must be >= 0", self.smooth)));
        }
        if self.rank < 1 {
            return Err(Error::OutOfRange("rank must be at least 1".into()));
        }
        Ok(())
    }

    /// Per-mode amplitude factor `(1 + |k|^2)^{-s} / t`.
    pub fn amplitude(&self, k: FreqIndex) -> f64 {
        laplace_symbol(k).powf(-self.smooth) / self.scale
    }

    /// `E|c_k|^2` for one component.
    pub fn mode_variance(&self, k: FreqIndex) -> f64 {
        2.0 * self.amplitude(k).powi(2)
    }
}

fn draw(spec: &GaussianSpec, seed: u64, index: u64) -> Vec<SpectralField> {
    draw_in(spec, seed, domain::WHITE_NOISE, index)
}

pub(crate) fn draw_in(spec: &GaussianSpec, seed: u64, dom: u64, index: u64) -> Vec<SpectralField> {
    Sampler::new(spec).draw(seed, dom, index)
}

/// Amplitude table of a spec, for drawing many samples.
pub(crate) struct Sampler {
    trunc: usize,
    rank: usize,
    amps: Vec<f64>,
}

impl Sampler {
    pub(crate) fn new(spec: &GaussianSpec) -> Self {
        let amps = SpectralField::zeros(spec.trunc).modes().map(|(k, _)| spec.amplitude(k)).collect();
        Self { trunc: spec.trunc, rank: spec.rank, amps }
    }

    pub(crate) fn draw(&self, seed: u64, dom: u64, index: u64) -> Vec<SpectralField> {
        (0..self.rank)
            .map(|comp| {
                let mut rng = mc::stream(seed, dom, index, comp as u64);
                let coeffs = self
                    .amps
                    .iter()
                    .map(|&amp| {
                        let a: f64 = rng.sample(StandardNormal);
                        let b: f64 = rng.sample(StandardNormal);
                        Complex64::new(a, b) * amp
                    })
                    .collect();
                SpectralField::from_coeffs(self.trunc, coeffs).expect("table matches truncation")
            })
            .collect()
    }
}

/// Sample `index` of the white-noise measure at scale `t`: one field per
/// component.
pub fn sample_white_noise(spec: &GaussianSpec, seed: u64, index: u64) -> Result<Vec<SpectralField>> {
    spec.validate()?;
    if spec.smooth != 0.0 {
        return Err(Error::OutOfRange("white noise requires smooth = 0".into()));
    }
    Ok(draw(spec, seed, index))
}

/// Sample `index` of the smoothed measure: the white-noise sample with the
/// same `(seed, index)` pushed through `(1 - Δ)^{-s}`.
pub fn sample_smoothed(spec: &GaussianSpec, seed: u64, index: u64) -> Result<Vec<SpectralField>> {
    spec.validate()?;
    Ok(draw(spec, seed, index))
}

/// Closed form of `E[exp(i Re<φ, σ>)]` under the (smoothed) measure.
pub fn characteristic_functional_exact(spec: &GaussianSpec, phi: &SpectralField) -> f64 {
    let q: f64 = phi.modes().map(|(k, c)| spec.amplitude(k).powi(2) * c.norm_sqr()).sum();
    (-0.5 * q).exp()
}

/// Monte Carlo estimate of `E[exp(i Re<φ, σ>)]`, `σ` the first component.
pub fn characteristic_functional_mc(
    spec: &GaussianSpec,
    phi: &SpectralField,
    n: usize,
    seed: u64,
) -> Result<McEstimate> {
    Ok(characteristic_functional_mc_batch(spec, std::slice::from_ref(phi), n, seed)?.remove(0))
}

/// Estimates for several test fields from one shared sample stream.
pub fn characteristic_functional_mc_batch(
    spec: &GaussianSpec,
    phis: &[SpectralField],
    n: usize,
    seed: u64,
) -> Result<Vec<McEstimate>> {
    spec.validate()?;
    if n < 2 {
        return Err(Error::TooFewSamples(n));
    }
    for phi in phis {
        if phi.trunc() != spec.trunc {
            return Err(Error::DimensionMismatch { expected: spec.trunc, got: phi.trunc() });
        }
    }
    let sampler = Sampler::new(spec);
    let rows: Vec<Vec<Complex64>> = mc::par_samples(n, |i| {
        let sigma = &sampler.draw(seed, domain::WHITE_NOISE, i)[0];
        phis.iter()
            .map(|phi| {
                let x = l2_inner(phi, sigma).expect("same truncation").re;
                Complex64::from_polar(1.0, x)
            })
            .collect()
    });
    (0..phis.len())
        .map(|j| {
            let col: Vec<Complex64> = rows.iter().map(|r| r[j]).collect();
            McEstimate::from_samples(&col)
        })
        .collect()
}

/// Radon–Nikodym derivative of the measure translated by `v` against the
/// measure itself, at the point `a`:
/// `exp(t^2 Re<(1 - Δ)^{2s} v, a> - t^2 |v|_{2s}^2 / 2)`.
pub fn cameron_martin_density(spec: &GaussianSpec, v: &SpectralField, a: &SpectralField) -> Result<f64> {
    CmWeight::new(spec, v).at(a)
}

/// `v`-dependent parts of the density, computed once per translation.
struct CmWeight {
    weighted: SpectralField,
    t2: f64,
    offset: f64,
}

impl CmWeight {
    fn new(spec: &GaussianSpec, v: &SpectralField) -> Self {
        let t2 = spec.scale * spec.scale;
        let nv = sobolev_norm(v, 2.0 * spec.smooth);
        Self { weighted: crate::spectral::laplacian_power(v, 2.0 * spec.smooth), t2, offset: 0.5 * t2 * nv * nv }
    }

    fn at(&self, a: &SpectralField) -> Result<f64> {
        Ok((self.t2 * l2_inner(&self.weighted, a)?.re - self.offset).exp())
    }
}

/// Both sides of the translation identity for `g = exp(i Re<φ, .>)`:
/// `E[g(a + v)]` from one stream and `E[g(a) ρ_v(a)]` from an independent
/// one.
pub fn cameron_martin_check(
    spec: &GaussianSpec,
    v: &SpectralField,
    phi: &SpectralField,
    n: usize,
    seed: u64,
) -> Result<(McEstimate, McEstimate)> {
    spec.validate()?;
    if n < 2 {
        return Err(Error::TooFewSamples(n));
    }
    let g = |x: &SpectralField| -> Complex64 {
        Complex64::from_polar(1.0, l2_inner(phi, x).expect("same truncation").re)
    };
    let sampler = Sampler::new(spec);
    let translated: Vec<Complex64> = mc::par_samples(n, |i| {
        let a = &sampler.draw(seed, domain::TRANSLATED, i)[0];
        g(&a.add(v).expect("same truncation"))
    });
    let w = CmWeight::new(spec, v);
    let weighted: Vec<Complex64> = mc::par_samples(n, |i| {
        let a = &sampler.draw(seed, domain::WHITE_NOISE, i)[0];
        g(a) * w.at(a).expect("same truncation")
    });
    Ok((McEstimate::from_samples(&translated)?, McEstimate::from_samples(&weighted)?))
}
