//! The Landau–Ginzburg map
//! `F_s(φ) = (1 - Δ)^s (∂φ + conj(P'(φ)))` on a truncated field space, its
//! derivative, the relative operator `K(φ_0, φ) = D_{φ_0}^{-1} D_φ - 1`, the
//! phase `Ψ = det_3(1 + K) / |det_3(1 + K)|`, and a Monte Carlo estimator for
//! the pulled-back white-noise measure.
//!
//! Two derivatives are available. The Fréchet derivative of `φ -> conj(P'(φ))`
//! conjugates its argument, `δ -> conj(P''(φ)) conj(δ)`, so `D_φ` is only
//! real-linear and its determinant is taken over the realified space, where
//! `Ψ ∈ {±1}`. The literal variant drops the argument conjugation,
//! `δ -> conj(P''(φ)) δ`; that operator is complex-linear and its complex
//! determinant has a genuine `S^1` phase.
//!
//! Newton iterations solve `G(φ) = ∂φ + conj(P'(φ)) - (1 - Δ)^{-s} η = 0`,
//! which has the same zeros as `F_s(φ) = η`. `‖G‖_{L^2}` is the
//! `H^{-2s}` norm of `F_s(φ) - η`.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::detkit::{self, OperatorMatrix};
use crate::error::{Error, Result};
use crate::gaussian::{self, GaussianSpec};
use crate::mc::{self, domain, McEstimate, NeumaierSum};
use crate::poly;
use crate::spectral::{
    apply_polynomial, apply_polynomial_to, conjugate_field, del, del_symbol, laplace_symbol, laplacian_power,
    multiplication_operator, RealifiedOperator, SpectralField,
};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    #[default]
    Frechet,
    Literal,
}

impl std::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "frechet" => Ok(Self::Frechet),
            "literal" => Ok(Self::Literal),
            other => Err(Error::OutOfRange(format!("unknown variant `{other}`"))),
        }
    }
}

/// How `det_3(1 + K)` is evaluated for the phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DetRoute {
    /// Spectrum of `K`.
    #[default]
    Eigen,
    /// `det(1 + K) exp(-tr K + tr K^2 / 2)` with an LU determinant.
    TraceFormula,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WzlgModel {
    poly: Vec<Complex64>,
    dpoly: Vec<Complex64>,
    ddpoly: Vec<Complex64>,
    s: f64,
    t: f64,
    trunc: usize,
    base: Complex64,
}

/// Minimum `|P''(base)|`.
pub const BASE_TOL: f64 = 1e-8;

impl WzlgModel {
    /// `poly` lists the coefficients of `P`, lowest degree first. Without an
    /// explicit base the first root of `P'` (ordered by real then imaginary
    /// part) with `|P''| > BASE_TOL` is used.
    pub fn new(poly: Vec<Complex64>, s: f64, t: f64, trunc: usize, base: Option<Complex64>) -> Result<Self> {
        poly::check_finite(&poly)?;
        let poly = poly::trimmed(&poly);
        if poly.len() < 3 {
            return Err(Error::OutOfRange(format!("deg P = {} < 2", poly.len() - 1)));
        }
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::OutOfRange(format!("s = {s} must be positive")));
        }
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::OutOfRange(format!("t = {t} must be positive")));
        }
        if trunc < 1 {
            return Err(Error::OutOfRange("trunc must be at least 1".into()));
        }
        let dpoly = poly::derivative(&poly);
        let ddpoly = poly::derivative(&dpoly);
        spot_check_derivative(&poly, &dpoly)?;
        spot_check_derivative(&dpoly, &ddpoly)?;
        let base = match base {
            Some(b) => b,
            None => {
                let mut roots = poly::roots(&dpoly)?;
                roots.sort_by(|a, b| (a.re, a.im).partial_cmp(&(b.re, b.im)).unwrap_or(std::cmp::Ordering::Equal));
                roots
                    .into_iter()
                    .find(|&r| poly::eval(&ddpoly, r).norm() > BASE_TOL)
                    .ok_or_else(|| Error::OutOfRange("P' has no root with P'' != 0".into()))?
            }
        };
        if !(base.re.is_finite() && base.im.is_finite()) {
            return Err(Error::NonFinite("base point"));
        }
        let curv = poly::eval(&ddpoly, base).norm();
        if curv <= BASE_TOL {
            return Err(Error::OutOfRange(format!("|P''(base)| = {curv:e} <= {BASE_TOL:e}")));
        }
        Ok(Self { poly, dpoly, ddpoly, s, t, trunc, base })
    }

    pub fn poly(&self) -> &[Complex64] {
        &self.poly
    }

    pub fn dpoly(&self) -> &[Complex64] {
        &self.dpoly
    }

    pub fn degree(&self) -> usize {
        self.poly.len() - 1
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn trunc(&self) -> usize {
        self.trunc
    }

    pub fn base(&self) -> Complex64 {
        self.base
    }

    pub fn base_field(&self) -> SpectralField {
        SpectralField::constant(self.trunc, self.base)
    }

    /// Roots of `P'`, each giving a constant zero of `F_s`.
    pub fn critical_points(&self) -> Result<Vec<Complex64>> {
        poly::roots(&self.dpoly)
    }

    pub fn noise_spec(&self) -> GaussianSpec {
        GaussianSpec { trunc: self.trunc, scale: self.t, smooth: 0.0, rank: 1 }
    }

    /// Same polynomial and base at another truncation.
    pub fn with_trunc(&self, trunc: usize) -> Result<Self> {
        Self::new(self.poly.clone(), self.s, self.t, trunc, Some(self.base))
    }

    pub fn with_t(&self, t: f64) -> Result<Self> {
        Self::new(self.poly.clone(), self.s, t, self.trunc, Some(self.base))
    }

    fn check(&self, f: &SpectralField) -> Result<()> {
        if f.trunc() != self.trunc {
            return Err(Error::DimensionMismatch { expected: self.trunc, got: f.trunc() });
        }
        Ok(())
    }
}

fn spot_check_derivative(p: &[Complex64], dp: &[Complex64]) -> Result<()> {
    for z in [Complex64::new(0.3, -0.2), Complex64::new(-1.1, 0.7)] {
        let h = 1e-5;
        let fd = (poly::eval(p, z + h) - poly::eval(p, z - h)) / (2.0 * h);
        let exact = poly::eval(dp, z);
        let err = (fd - exact).norm() / exact.norm().max(1.0);
        if err > 1e-6 {
            return Err(Error::JacobianMismatch(err));
        }
    }
    Ok(())
}

/// `∂φ + conj(P'(φ))`, without the smoothing factor.
fn unscaled_f(model: &WzlgModel, phi: &SpectralField) -> Result<SpectralField> {
    del(phi).add(&conjugate_field(&apply_polynomial(phi, &model.dpoly)?))
}

/// `F_s(φ) = (1 - Δ)^s (∂φ + conj(P'(φ)))`.
pub fn apply_f(model: &WzlgModel, phi: &SpectralField) -> Result<SpectralField> {
    model.check(phi)?;
    Ok(laplacian_power(&unscaled_f(model, phi)?, model.s))
}

/// `conj(P''(φ))` over its full band `(d - 2) N`.
fn conj_curvature(model: &WzlgModel, phi: &SpectralField) -> Result<SpectralField> {
    let band = (model.degree() - 2).max(1) * model.trunc;
    Ok(conjugate_field(&apply_polynomial_to(phi, &model.ddpoly, band)?))
}

fn multiplication_part(model: &WzlgModel, psi: &SpectralField, variant: Variant) -> RealifiedOperator {
    multiplication_operator(psi, model.trunc, variant == Variant::Frechet)
}

fn unscaled_derivative(model: &WzlgModel, phi: &SpectralField, variant: Variant) -> Result<RealifiedOperator> {
    let mult = multiplication_part(model, &conj_curvature(model, phi)?, variant);
    RealifiedOperator::diagonal(model.trunc, del_symbol).add(&mult)
}

/// `D_φ` as a realified matrix.
pub fn derivative_operator(model: &WzlgModel, phi: &SpectralField, variant: Variant) -> Result<RealifiedOperator> {
    model.check(phi)?;
    let s = model.s;
    Ok(unscaled_derivative(model, phi, variant)?.scale_rows(|k| laplace_symbol(k).powf(s)))
}

/// Condition number above which the base operator counts as singular.
pub const COND_LIMIT: f64 = 1e12;

/// Inverse of `D_{φ_0}` with the smoothing factor stripped; the factor
/// cancels in `D_{φ_0}^{-1} D_φ`.
#[derive(Debug, Clone)]
pub struct BaseOperator {
    variant: Variant,
    trunc: usize,
    base_curv: SpectralField,
    inv: DMatrix<f64>,
    cond: f64,
}

fn norm_1(m: &DMatrix<f64>) -> f64 {
    m.column_iter().map(|c| c.iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max)
}

impl BaseOperator {
    pub fn new(model: &WzlgModel, variant: Variant) -> Result<Self> {
        let base = model.base_field();
        let base_curv = conj_curvature(model, &base)?;
        let d0 = unscaled_derivative(model, &base, variant)?.into_matrix();
        let inv = d0.clone().lu().try_inverse().ok_or(Error::SingularBasePoint { cond: f64::INFINITY })?;
        let cond = norm_1(&d0) * norm_1(&inv);
        if !(cond <= COND_LIMIT) {
            return Err(Error::SingularBasePoint { cond });
        }
        Ok(Self { variant, trunc: model.trunc, base_curv, inv, cond })
    }

    pub fn condition_number(&self) -> f64 {
        self.cond
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    /// `K = D_{φ_0}^{-1} (D_φ - D_{φ_0})`; exactly zero when the curvature
    /// fields coincide.
    pub fn k_operator(&self, model: &WzlgModel, phi: &SpectralField) -> Result<RealifiedOperator> {
        model.check(phi)?;
        if model.trunc != self.trunc {
            return Err(Error::DimensionMismatch { expected: self.trunc, got: model.trunc });
        }
        let diff = conj_curvature(model, phi)?.sub(&self.base_curv)?;
        let dim = self.inv.nrows();
        if diff.coeffs().iter().all(|c| *c == ZERO) {
            return Ok(RealifiedOperator::new(self.trunc, DMatrix::zeros(dim, dim))?);
        }
        let m = multiplication_part(model, &diff, self.variant);
        RealifiedOperator::new(self.trunc, &self.inv * m.matrix())
    }

    /// The operator handed to the determinant: the realified matrix for the
    /// Fréchet variant, its complex form for the literal one.
    pub fn k_matrix(&self, model: &WzlgModel, phi: &SpectralField) -> Result<OperatorMatrix> {
        let k = self.k_operator(model, phi)?;
        match self.variant {
            Variant::Frechet => Ok(OperatorMatrix::Real(k.into_matrix())),
            Variant::Literal => {
                let tol = 1e-10 * k.matrix().amax().max(1.0);
                let c = k.complex_part(tol).ok_or(Error::OutOfRange("literal K is not complex-linear".into()))?;
                Ok(OperatorMatrix::Complex(c))
            }
        }
    }

    pub fn psi_phase(&self, model: &WzlgModel, phi: &SpectralField, route: DetRoute) -> Result<Complex64> {
        let k = self.k_matrix(model, phi)?;
        let tol = detkit::default_phase_tol(k.dim());
        match route {
            DetRoute::Eigen => detkit::log_det_k(&k, 3)?.phase(tol),
            DetRoute::TraceFormula => detkit::phase(detkit::det_k_trace_formula(&k, 3)?, tol),
        }
    }
}

pub fn k_operator(model: &WzlgModel, phi: &SpectralField, variant: Variant) -> Result<RealifiedOperator> {
    BaseOperator::new(model, variant)?.k_operator(model, phi)
}

/// `Ψ(φ)`: phase of `det_3(1 + K(φ_0, φ))`, by the spectral route.
pub fn psi_phase(model: &WzlgModel, phi: &SpectralField, variant: Variant) -> Result<Complex64> {
    BaseOperator::new(model, variant)?.psi_phase(model, phi, DetRoute::Eigen)
}

// ---------------------------------------------------------------------------
// Newton sampler

/// `‖G‖_{L^2}` at which a Newton iterate counts as a solution.
pub const NEWTON_TOL: f64 = 1e-9;
pub const NEWTON_MAX_ITER: usize = 60;
pub const NEWTON_MAX_HALVINGS: usize = 40;
pub const DEDUP_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NewtonReport {
    pub converged: bool,
    pub iterations: usize,
    pub residual: f64,
}

fn residual(model: &WzlgModel, phi: &SpectralField, target: &SpectralField) -> Result<SpectralField> {
    unscaled_f(model, phi)?.sub(target)
}

/// Damped Newton for `F_s(φ) = η`, given `target = (1 - Δ)^{-s} η`.
pub fn newton_solve(
    model: &WzlgModel,
    target: &SpectralField,
    start: SpectralField,
) -> Result<(SpectralField, NewtonReport)> {
    model.check(target)?;
    model.check(&start)?;
    let mut phi = start;
    let mut r = residual(model, &phi, target)?;
    let mut rn = r.norm();
    let mut iterations = 0;
    while rn > NEWTON_TOL && iterations < NEWTON_MAX_ITER {
        iterations += 1;
        let jac = unscaled_derivative(model, &phi, Variant::Frechet)?.into_matrix();
        let Some(step) = jac.lu().solve(&r.to_real()) else { break };
        if !step.iter().all(|x| x.is_finite()) {
            break;
        }
        let step = SpectralField::from_real(model.trunc, &step)?;
        let mut lam = 1.0;
        let mut accepted = false;
        for _ in 0..=NEWTON_MAX_HALVINGS {
            let cand = phi.sub(&step.scale(Complex64::new(lam, 0.0)))?;
            let rc = residual(model, &cand, target)?;
            let rcn = rc.norm();
            if rcn < rn {
                phi = cand;
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
    let report = NewtonReport { converged: rn <= NEWTON_TOL, iterations, residual: rn };
    Ok((phi, report))
}

/// Random Newton start: the mean mode is complex normal with scale
/// `max(1, |base|)`, mode `k` complex normal with scale `(1 + |k|^2)^{-1}`.
pub fn random_start(model: &WzlgModel, rng: &mut impl Rng) -> SpectralField {
    let scale0 = model.base.norm().max(1.0);
    SpectralField::from_fn(model.trunc, |k| {
        let a: f64 = rng.sample(StandardNormal);
        let b: f64 = rng.sample(StandardNormal);
        let sigma = if k.norm_sq() == 0.0 { scale0 } else { 1.0 / laplace_symbol(k) };
        Complex64::new(a, b) * (sigma / std::f64::consts::SQRT_2)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplerOptions {
    /// Random starts per draw, split evenly between two seed batches.
    pub n_starts: usize,
    pub variant: Variant,
    pub route: DetRoute,
}

impl Default for SamplerOptions {
    fn default() -> Self {
        Self { n_starts: 64, variant: Variant::Frechet, route: DetRoute::Eigen }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub field: SpectralField,
    pub newton: NewtonReport,
    /// `None` when `|det_3(1 + K)|` is below the phase tolerance.
    pub phase: Option<Complex64>,
    /// `L^2` distance to the nearest constant zero of `P'`.
    pub distance_to_constants: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DrawResult {
    pub branches: Vec<Branch>,
    pub newton_failures: usize,
    /// Whether the two random-start batches found the same branches.
    pub batches_agree: bool,
}

impl DrawResult {
    pub fn phase_sum(&self) -> Complex64 {
        self.branches.iter().filter_map(|b| b.phase).sum()
    }
}

fn insert_unique(found: &mut Vec<(SpectralField, NewtonReport)>, phi: SpectralField, rep: NewtonReport) -> bool {
    let dup = found.iter().any(|(f, _)| f.sub(&phi).map(|d| d.norm() <= DEDUP_TOL).unwrap_or(false));
    if !dup {
        found.push((phi, rep));
    }
    !dup
}

fn same_set(a: &[SpectralField], b: &[SpectralField]) -> bool {
    let covered = |x: &[SpectralField], y: &[SpectralField]| {
        x.iter().all(|f| y.iter().any(|g| f.sub(g).map(|d| d.norm() <= DEDUP_TOL).unwrap_or(false)))
    };
    covered(a, b) && covered(b, a)
}

/// Solves `F_s(φ) = η` from the constant zeros of `P'` and from
/// `opts.n_starts` random starts, then attaches `Ψ` to every branch.
/// Start batches are drawn from `(seed, index)`.
pub fn pullback_sample(
    model: &WzlgModel,
    base_op: &BaseOperator,
    eta: &SpectralField,
    opts: SamplerOptions,
    seed: u64,
    index: u64,
) -> Result<DrawResult> {
    model.check(eta)?;
    let target = laplacian_power(eta, -model.s);
    let crit = model.critical_points()?;
    let mut found: Vec<(SpectralField, NewtonReport)> = Vec::new();
    let mut failures = 0;
    for &c in &crit {
        let (phi, rep) = newton_solve(model, &target, SpectralField::constant(model.trunc, c))?;
        if rep.converged {
            insert_unique(&mut found, phi, rep);
        } else {
            failures += 1;
        }
    }
    let mut batch_sets: [Vec<SpectralField>; 2] = [Vec::new(), Vec::new()];
    let per_batch = [opts.n_starts.div_ceil(2), opts.n_starts / 2];
    for (batch, &count) in per_batch.iter().enumerate() {
        let mut rng = mc::stream(seed, domain::WZLG_STARTS, index, batch as u64);
        for _ in 0..count {
            let (phi, rep) = newton_solve(model, &target, random_start(model, &mut rng))?;
            if !rep.converged {
                failures += 1;
                continue;
            }
            let set = &mut batch_sets[batch];
            if !set.iter().any(|f| f.sub(&phi).map(|d| d.norm() <= DEDUP_TOL).unwrap_or(false)) {
                set.push(phi.clone());
            }
            insert_unique(&mut found, phi, rep);
        }
    }
    let batches_agree = same_set(&batch_sets[0], &batch_sets[1]);

    let mut branches = Vec::with_capacity(found.len());
    for (field, newton) in found {
        let phase = match base_op.psi_phase(model, &field, opts.route) {
            Ok(p) => Some(p),
            Err(Error::NearZeroDeterminant { .. }) => None,
            Err(e) => return Err(e),
        };
        let distance_to_constants = crit
            .iter()
            .map(|&c| field.sub(&SpectralField::constant(model.trunc, c)).map(|d| d.norm()).unwrap_or(f64::INFINITY))
            .fold(f64::INFINITY, f64::min);
        branches.push(Branch { field, newton, phase, distance_to_constants });
    }
    Ok(DrawResult { branches, newton_failures: failures, batches_agree })
}

/// Aggregate of an η-draw experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Experiment {
    /// Branches per draw.
    pub mass: McEstimate,
    /// Sum of `Ψ` over branches per draw.
    pub phase_integral: McEstimate,
    /// Number of draws with a given branch count.
    pub branch_histogram: BTreeMap<usize, usize>,
    pub newton_failures: usize,
    /// Branches whose determinant fell below the phase tolerance.
    pub singular_branches: usize,
    /// Draws whose two start batches found the same branch set.
    pub batch_agreements: usize,
    /// Mean distance from a branch to the nearest constant zero of `P'`.
    pub mean_distance_to_constants: f64,
}

/// Runs `n_samples` η-draws from the white noise at scale `t`.
pub fn run_experiment(model: &WzlgModel, n_samples: usize, seed: u64, opts: SamplerOptions) -> Result<Experiment> {
    if n_samples == 0 {
        return Err(Error::TooFewSamples(0));
    }
    let base_op = BaseOperator::new(model, opts.variant)?;
    let spec = model.noise_spec();
    let draws: Vec<Result<DrawResult>> = mc::par_samples(n_samples, |i| {
        let eta = gaussian::draw_in(&spec, seed, domain::WZLG_NOISE, i).remove(0);
        pullback_sample(model, &base_op, &eta, opts, seed, i)
    });
    let draws = draws.into_iter().collect::<Result<Vec<_>>>()?;
    summarize(&draws)
}

fn summarize(draws: &[DrawResult]) -> Result<Experiment> {
    let counts: Vec<Complex64> = draws.iter().map(|d| Complex64::new(d.branches.len() as f64, 0.0)).collect();
    let phases: Vec<Complex64> = draws.iter().map(DrawResult::phase_sum).collect();
    let mut hist = BTreeMap::new();
    for d in draws {
        *hist.entry(d.branches.len()).or_insert(0) += 1;
    }
    let mut dist = NeumaierSum::default();
    let mut nb = 0usize;
    for b in draws.iter().flat_map(|d| &d.branches) {
        dist.add(Complex64::new(b.distance_to_constants, 0.0));
        nb += 1;
    }
    Ok(Experiment {
        mass: McEstimate::from_samples(&counts)?,
        phase_integral: McEstimate::from_samples(&phases)?,
        branch_histogram: hist,
        newton_failures: draws.iter().map(|d| d.newton_failures).sum(),
        singular_branches: draws.iter().flat_map(|d| &d.branches).filter(|b| b.phase.is_none()).count(),
        batch_agreements: draws.iter().filter(|d| d.batches_agree).count(),
        mean_distance_to_constants: if nb == 0 { f64::NAN } else { dist.total().re / nb as f64 },
    })
}

/// Mean number of branches per η-draw.
pub fn estimate_mass(model: &WzlgModel, n_samples: usize, seed: u64, opts: SamplerOptions) -> Result<McEstimate> {
    Ok(run_experiment(model, n_samples, seed, opts)?.mass)
}

/// Mean of `sum_branches Ψ` per η-draw.
pub fn estimate_phase_integral(
    model: &WzlgModel,
    n_samples: usize,
    seed: u64,
    opts: SamplerOptions,
) -> Result<McEstimate> {
    Ok(run_experiment(model, n_samples, seed, opts)?.phase_integral)
}
