//! Finite-dimensional pullback measures.
//!
//! For a smooth `f: R^n -> R^n` and the standard Gaussian `μ` on the target,
//! `f^* μ` has the signed density `(2π)^{-n/2} exp(-|f(x)|^2 / 2) det ∇f(x)`.
//! Its total mass is the degree of `f`; integrating a test function against
//! the unsigned pushforward-by-local-inverses measure instead counts
//! preimages. The phase relation ties the two together: weighting each
//! preimage by the sign of its jacobian recovers the signed integral.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::mc::{self, domain, McEstimate};
use crate::poly;

type EvalFn = dyn Fn(&[f64]) -> Vec<f64> + Send + Sync;
type JacFn = dyn Fn(&[f64]) -> DMatrix<f64> + Send + Sync;

/// Registry ids accepted by [`SmoothMap::from_registry`].
pub const REGISTRY: [&str; 6] = ["identity", "zsq", "zcube", "zbar", "zsq_m1", "cubic1d"];

/// A smooth self-map of `R^n` with an analytic jacobian.
#[derive(Clone)]
pub struct SmoothMap {
    name: String,
    dim: usize,
    box_radius: f64,
    eval: Arc<EvalFn>,
    jac: Arc<JacFn>,
}

impl fmt::Debug for SmoothMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SmoothMap")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("box_radius", &self.box_radius)
            .finish()
    }
}

impl SmoothMap {
    /// Builds the map and checks the jacobian against central differences
    /// at 10 pseudo-random points.
    pub fn new(
        name: impl Into<String>,
        dim: usize,
        box_radius: f64,
        eval: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
        jac: impl Fn(&[f64]) -> DMatrix<f64> + Send + Sync + 'static,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::OutOfRange("map dimension must be positive".into()));
        }
        if !(box_radius > 0.0 && box_radius.is_finite()) {
            return Err(Error::OutOfRange(format!("box radius {box_radius}")));
        }
        let map = Self { name: name.into(), dim, box_radius, eval: Arc::new(eval), jac: Arc::new(jac) };
        map.self_test()?;
        Ok(map)
    }

    fn self_test(&self) -> Result<()> {
        let mut rng = mc::stream(0, domain::FINDIM_STARTS, u64::MAX, 0);
        for _ in 0..10 {
            let x: Vec<f64> = (0..self.dim).map(|_| rng.random_range(-1.5..1.5)).collect();
            let j = self.jacobian(&x);
            let scale = j.amax().max(1.0);
            let mut worst = 0.0f64;
            for col in 0..self.dim {
                let h = 1e-6 * x[col].abs().max(1.0);
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[col] += h;
                xm[col] -= h;
                let fp = self.eval(&xp);
                let fm = self.eval(&xm);
                for row in 0..self.dim {
                    let fd = (fp[row] - fm[row]) / (2.0 * h);
                    worst = worst.max((fd - j[(row, col)]).abs() / scale);
                }
            }
            if !(worst <= 1e-5) {
                return Err(Error::JacobianMismatch(worst));
            }
        }
        Ok(())
    }

    pub fn identity(n: usize) -> Self {
        Self::new(
            "identity",
            n,
            10.0,
            |x| x.to_vec(),
            move |_| DMatrix::identity(n, n),
        )
        .expect("identity passes its own check")
    }

    /// `x -> A x`.
    pub fn linear(name: impl Into<String>, a: DMatrix<f64>) -> Result<Self> {
        if a.nrows() != a.ncols() {
            return Err(Error::DimensionMismatch { expected: a.nrows(), got: a.ncols() });
        }
        let n = a.nrows();
        let am = a.clone();
        Self::new(
            name,
            n,
            10.0,
            move |x| (&am * DVector::from_column_slice(x)).iter().copied().collect(),
            move |_| a.clone(),
        )
    }

    /// The realification of `z -> P(z)` on `C = R^2`, coefficients lowest
    /// degree first.
    pub fn holomorphic(name: impl Into<String>, coeffs: Vec<Complex64>) -> Result<Self> {
        poly::check_finite(&coeffs)?;
        let d = poly::derivative(&coeffs);
        Self::new(
            name,
            2,
            10.0,
            move |x| {
                let w = poly::eval(&coeffs, Complex64::new(x[0], x[1]));
                vec![w.re, w.im]
            },
            move |x| {
                let w = poly::eval(&d, Complex64::new(x[0], x[1]));
                DMatrix::from_row_slice(2, 2, &[w.re, -w.im, w.im, w.re])
            },
        )
    }

    /// A real polynomial on `R^1`, coefficients lowest degree first.
    pub fn polynomial_1d(name: impl Into<String>, coeffs: Vec<f64>) -> Result<Self> {
        if !coeffs.iter().all(|c| c.is_finite()) {
            return Err(Error::NonFinite("polynomial coefficients"));
        }
        let cz = poly::from_real(&coeffs);
        let dz = poly::derivative(&cz);
        Self::new(
            name,
            1,
            10.0,
            move |x| vec![poly::eval(&cz, Complex64::new(x[0], 0.0)).re],
            move |x| DMatrix::from_element(1, 1, poly::eval(&dz, Complex64::new(x[0], 0.0)).re),
        )
    }

    pub fn from_registry(id: &str) -> Result<Self> {
        let c = |re: f64| Complex64::new(re, 0.0);
        let zero = c(0.0);
        match id {
            "identity" => Ok(Self::identity(2)),
            "zsq" => Self::holomorphic(id, vec![zero, zero, c(1.0)]),
            "zcube" => Self::holomorphic(id, vec![zero, zero, zero, c(1.0)]),
            "zsq_m1" => Self::holomorphic(id, vec![c(-1.0), zero, c(1.0)]),
            "zbar" => Self::linear(id, DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0])),
            "cubic1d" => Self::polynomial_1d(id, vec![0.0, -1.0, 0.0, 1.0]),
            other => Err(Error::UnknownMap(other.to_string())),
        }
    }

    pub fn with_box_radius(mut self, r: f64) -> Result<Self> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::OutOfRange(format!("box radius {r}")));
        }
        self.box_radius = r;
        Ok(self)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn box_radius(&self) -> f64 {
        self.box_radius
    }

    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        (self.eval)(x)
    }

    pub fn jacobian(&self, x: &[f64]) -> DMatrix<f64> {
        (self.jac)(x)
    }

    pub fn jacobian_det(&self, x: &[f64]) -> f64 {
        let j = self.jacobian(x);
        match self.dim {
            1 => j[(0, 0)],
            2 => j[(0, 0)] * j[(1, 1)] - j[(0, 1)] * j[(1, 0)],
            _ => j.determinant(),
        }
    }
}

fn norm_sq(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

/// `(2π)^{-n/2} exp(-|f(x)|^2 / 2) det ∇f(x)`.
pub fn pullback_density(m: &SmoothMap, x: &[f64]) -> f64 {
    let fx = m.eval(x);
    (2.0 * PI).powf(-(m.dim as f64) / 2.0) * (-0.5 * norm_sq(&fx)).exp() * m.jacobian_det(x)
}

/// Tensor trapezoid grid on `[-radius, radius]^n` with `points` nodes per
/// axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadGrid {
    pub radius: f64,
    pub points: usize,
}

impl Default for QuadGrid {
    fn default() -> Self {
        Self { radius: 8.0, points: 801 }
    }
}

/// Below this the integrand counts as decayed at the grid boundary.
pub const DECAY_TOL: f64 = 1e-12;

/// `∫ g(x) (f^* μ)(dx)` by the trapezoid rule, `n <= 2`.
pub fn weighted_quadrature(m: &SmoothMap, g: &(dyn Fn(&[f64]) -> f64 + Sync), grid: QuadGrid) -> Result<f64> {
    if m.dim > 2 {
        return Err(Error::OutOfRange(format!("quadrature needs dim <= 2, got {}", m.dim)));
    }
    if grid.points < 3 || !(grid.radius > 0.0) {
        return Err(Error::OutOfRange("quadrature grid needs >= 3 points and positive radius".into()));
    }
    let p = grid.points;
    let h = 2.0 * grid.radius / (p - 1) as f64;
    let node = |i: usize| -grid.radius + h * i as f64;
    let weight = |i: usize| if i == 0 || i == p - 1 { 0.5 } else { 1.0 };
    let integrand = |x: &[f64]| g(x) * pullback_density(m, x);

    let mut boundary = 0.0f64;
    let mut sum = 0.0;
    if m.dim == 1 {
        for i in 0..p {
            let v = integrand(&[node(i)]);
            if i == 0 || i == p - 1 {
                boundary = boundary.max(v.abs());
            }
            sum += weight(i) * v;
        }
        sum *= h;
    } else {
        let rows: Vec<(f64, f64)> = mc::par_samples(p, |i| {
            let i = i as usize;
            let mut row = 0.0;
            let mut edge = 0.0f64;
            for j in 0..p {
                let v = integrand(&[node(i), node(j)]);
                if i == 0 || j == 0 || i == p - 1 || j == p - 1 {
                    edge = edge.max(v.abs());
                }
                row += weight(j) * v;
            }
            (weight(i) * row, edge)
        });
        for (r, e) in rows {
            sum += r;
            boundary = boundary.max(e);
        }
        sum *= h * h;
    }
    if boundary >= DECAY_TOL {
        return Err(Error::InsufficientDecay { boundary });
    }
    Ok(sum)
}

/// Total signed mass of `f^* μ`; equals the degree of `f`.
pub fn degree_quadrature(m: &SmoothMap, grid: QuadGrid) -> Result<f64> {
    weighted_quadrature(m, &|_| 1.0, grid)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PreimageOptions {
    pub n_starts: usize,
    pub dedup_tol: f64,
}

impl Default for PreimageOptions {
    fn default() -> Self {
        Self { n_starts: 200, dedup_tol: 1e-6 }
    }
}

/// Residual below which a Newton iterate counts as a root.
pub const ROOT_TOL: f64 = 1e-10;
/// Jacobian determinants at or below this mark a degenerate root.
pub const DEGENERATE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct Preimage {
    pub x: Vec<f64>,
    pub det: f64,
    pub residual: f64,
}

impl Preimage {
    pub fn is_degenerate(&self) -> bool {
        self.det.abs() <= DEGENERATE_TOL
    }

    /// Sign of the jacobian determinant, 0 at a degenerate root.
    pub fn sign(&self) -> i32 {
        if self.is_degenerate() {
            0
        } else if self.det > 0.0 {
            1
        } else {
            -1
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PreimageSet {
    pub roots: Vec<Preimage>,
    /// Starts whose Newton iteration did not reach the residual tolerance.
    pub failed_starts: usize,
}

impl PreimageSet {
    pub fn regular(&self) -> impl Iterator<Item = &Preimage> {
        self.roots.iter().filter(|r| !r.is_degenerate())
    }

    pub fn has_degenerate(&self) -> bool {
        self.roots.iter().any(Preimage::is_degenerate)
    }
}

fn newton(m: &SmoothMap, y: &[f64], mut x: Vec<f64>) -> Option<(Vec<f64>, f64)> {
    let resid = |x: &[f64]| -> Vec<f64> { m.eval(x).iter().zip(y).map(|(a, b)| a - b).collect() };
    let mut r = resid(&x);
    let mut rn = norm_sq(&r).sqrt();
    let mut polish = 0;
    for _ in 0..200 {
        if rn <= ROOT_TOL {
            polish += 1;
            if polish > 8 {
                break;
            }
        }
        let step = match m.jacobian(&x).lu().solve(&DVector::from_column_slice(&r)) {
            Some(s) if s.iter().all(|v| v.is_finite()) => s,
            _ => break,
        };
        let mut lam = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let cand: Vec<f64> = x.iter().zip(step.iter()).map(|(a, s)| a - lam * s).collect();
            let rc = resid(&cand);
            let rcn = norm_sq(&rc).sqrt();
            if rcn < rn || (rn <= ROOT_TOL && rcn <= ROOT_TOL) {
                x = cand;
                r = rc;
                rn = rcn;
                accepted = true;
                break;
            }
            lam *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    (rn <= ROOT_TOL).then_some((x, rn))
}

/// Multistart Newton for `f(x) = y` from `n_starts` uniform points in the
/// map's box; starts are drawn from `(seed, stream)`.
pub fn preimages_with_stream(
    m: &SmoothMap,
    y: &[f64],
    opts: PreimageOptions,
    seed: u64,
    stream: u64,
) -> Result<PreimageSet> {
    if y.len() != m.dim {
        return Err(Error::DimensionMismatch { expected: m.dim, got: y.len() });
    }
    if !y.iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinite("target point"));
    }
    let mut rng = mc::stream(seed, domain::FINDIM_STARTS, stream, 0);
    let r = m.box_radius;
    let mut roots: Vec<Preimage> = Vec::new();
    let mut failed = 0;
    for _ in 0..opts.n_starts {
        let x0: Vec<f64> = (0..m.dim).map(|_| rng.random_range(-r..=r)).collect();
        match newton(m, y, x0) {
            Some((x, residual)) => {
                let dup = roots
                    .iter()
                    .any(|p| norm_sq(&p.x.iter().zip(&x).map(|(a, b)| a - b).collect::<Vec<_>>()).sqrt() <= opts.dedup_tol);
                if !dup {
                    let det = m.jacobian_det(&x);
                    roots.push(Preimage { x, det, residual });
                }
            }
            None => failed += 1,
        }
    }
    roots.sort_by(|a, b| a.x.partial_cmp(&b.x).unwrap_or(std::cmp::Ordering::Equal));
    Ok(PreimageSet { roots, failed_starts: failed })
}

pub fn preimages(m: &SmoothMap, y: &[f64], opts: PreimageOptions, seed: u64) -> Result<PreimageSet> {
    preimages_with_stream(m, y, opts, seed, 0)
}

/// `sum_{x in f^{-1}(y)} sign det ∇f(x)` at a regular value `y`.
pub fn degree_zero_count(m: &SmoothMap, y: &[f64], opts: PreimageOptions, seed: u64) -> Result<i64> {
    let set = preimages(m, y, opts, seed)?;
    if let Some(p) = set.roots.iter().find(|p| p.is_degenerate()) {
        return Err(Error::DegenerateRoot { residual: p.residual, det: p.det });
    }
    Ok(set.roots.iter().map(|p| p.sign() as i64).sum())
}

fn pushforward_with(
    m: &SmoothMap,
    weight: &(dyn Fn(&Preimage) -> f64 + Sync),
    n_samples: usize,
    seed: u64,
    opts: PreimageOptions,
) -> Result<McEstimate> {
    if n_samples < 2 {
        return Err(Error::TooFewSamples(n_samples));
    }
    let samples: Vec<Result<f64>> = mc::par_samples(n_samples, |i| {
        let mut rng = mc::stream(seed, domain::FINDIM_TARGET, i, 0);
        let y: Vec<f64> = (0..m.dim).map(|_| rng.sample(StandardNormal)).collect();
        let set = preimages_with_stream(m, &y, opts, seed, i + 1)?;
        Ok(set.regular().map(weight).sum())
    });
    let values = samples.into_iter().collect::<Result<Vec<f64>>>()?;
    McEstimate::from_real_samples(&values)
}

/// `E_y[sum_{x in f^{-1}(y)} g(x)]` for `y` standard Gaussian on the target;
/// degenerate preimages carry no mass.
pub fn pushforward_expectation(
    m: &SmoothMap,
    g: &(dyn Fn(&[f64]) -> f64 + Sync),
    n_samples: usize,
    seed: u64,
    opts: PreimageOptions,
) -> Result<McEstimate> {
    pushforward_with(m, &|p| g(&p.x), n_samples, seed, opts)
}

/// Quadrature floor added to the Monte Carlo band in [`PhaseRelation::holds`].
pub const PHASE_QUAD_FLOOR: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseRelation {
    /// Quadrature of `g` against the signed density.
    pub lhs: McEstimate,
    /// Pushforward expectation of `g · sign det ∇f`.
    pub rhs: McEstimate,
}

impl PhaseRelation {
    pub fn holds(&self) -> bool {
        self.rhs.agrees_with(self.lhs.mean, 3.0, PHASE_QUAD_FLOOR)
    }
}

pub fn phase_relation_check(
    m: &SmoothMap,
    g: &(dyn Fn(&[f64]) -> f64 + Sync),
    n_samples: usize,
    seed: u64,
    grid: QuadGrid,
    opts: PreimageOptions,
) -> Result<PhaseRelation> {
    let lhs = weighted_quadrature(m, g, grid)?;
    let rhs = pushforward_with(m, &|p| g(&p.x) * p.sign() as f64, n_samples, seed, opts)?;
    Ok(PhaseRelation { lhs: McEstimate::exact(Complex64::new(lhs, 0.0)), rhs })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_builds_and_rejects_unknown() {
        for id in REGISTRY {
            assert_eq!(SmoothMap::from_registry(id).unwrap().name(), id);
        }
        assert!(matches!(SmoothMap::from_registry("zfour"), Err(Error::UnknownMap(_))));
    }

    #[test]
    fn wrong_jacobian_is_caught() {
        let bad = SmoothMap::new("bad", 1, 5.0, |x| vec![x[0] * x[0]], |x| DMatrix::from_element(1, 1, x[0]));
        assert!(matches!(bad, Err(Error::JacobianMismatch(_))));
    }

    #[test]
    fn density_examples() {
        let id = SmoothMap::identity(2);
        assert!((pullback_density(&id, &[0.0, 0.0]) - 1.0 / (2.0 * PI)).abs() < 1e-15);
        let neg = SmoothMap::linear("neg", -DMatrix::<f64>::identity(2, 2)).unwrap();
        assert!((pullback_density(&neg, &[0.0, 0.0]) - 1.0 / (2.0 * PI)).abs() < 1e-15);
        let two = SmoothMap::linear("two", DMatrix::from_element(1, 1, 2.0)).unwrap();
        assert!((pullback_density(&two, &[0.0]) - 2.0 / (2.0 * PI).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn quadrature_examples() {
        let grid = QuadGrid::default();
        let d1 = degree_quadrature(&SmoothMap::identity(1), grid).unwrap();
        assert!((d1 - 1.0).abs() < 1e-6);
        let zbar = SmoothMap::from_registry("zbar").unwrap();
        assert!((degree_quadrature(&zbar, grid).unwrap() + 1.0).abs() < 1e-6);
        let zsq = SmoothMap::from_registry("zsq").unwrap();
        assert!((degree_quadrature(&zsq, grid).unwrap() - 2.0).abs() < 1e-3);
    }

    #[test]
    fn quadrature_flags_slow_decay() {
        let grid = QuadGrid { radius: 2.0, points: 101 };
        assert!(matches!(
            degree_quadrature(&SmoothMap::identity(1), grid),
            Err(Error::InsufficientDecay { .. })
        ));
    }

    #[test]
    fn preimage_examples() {
        let opts = PreimageOptions::default();
        let set = preimages(&SmoothMap::identity(1), &[0.3], opts, 1).unwrap();
        assert_eq!(set.roots.len(), 1);
        assert!((set.roots[0].x[0] - 0.3).abs() < 1e-12);
        assert_eq!(set.roots[0].sign(), 1);

        let zsq = SmoothMap::from_registry("zsq").unwrap();
        let set = preimages(&zsq, &[1.0, 0.0], opts, 1).unwrap();
        assert_eq!(set.roots.len(), 2);
        assert!((set.roots[0].x[0] + 1.0).abs() < 1e-10 && (set.roots[1].x[0] - 1.0).abs() < 1e-10);
        assert!(set.roots.iter().all(|p| p.sign() == 1));

        let set = preimages(&zsq, &[0.0, 0.0], opts, 1).unwrap();
        assert!(set.has_degenerate());
        assert!(matches!(degree_zero_count(&zsq, &[0.0, 0.0], opts, 1), Err(Error::DegenerateRoot { .. })));
    }

    #[test]
    fn zero_count_examples() {
        let opts = PreimageOptions::default();
        let zcube = SmoothMap::from_registry("zcube").unwrap();
        assert_eq!(degree_zero_count(&zcube, &[0.4, -0.2], opts, 2).unwrap(), 3);
        let shifted = SmoothMap::polynomial_1d("x2p1", vec![1.0, 0.0, 1.0]).unwrap();
        assert_eq!(degree_zero_count(&shifted, &[0.0], opts, 2).unwrap(), 0);
        let zbar = SmoothMap::from_registry("zbar").unwrap();
        assert_eq!(degree_zero_count(&zbar, &[0.1, 0.7], opts, 2).unwrap(), -1);
    }

    #[test]
    fn identity_pushforward_of_one_is_exact() {
        let e = pushforward_expectation(&SmoothMap::identity(2), &|_| 1.0, 50, 3, PreimageOptions::default()).unwrap();
        assert_eq!(e.mean, Complex64::new(1.0, 0.0));
        assert_eq!(e.stderr, 0.0);
    }
}
