//! Wick pairings, cycles-and-chain partitions, and the correlation identity
//! for quadratic insertions of a matrix-valued Gaussian field.
//!
//! The field is `a(p) = sum_α sum_k c_{α,k} T_α e_k(p)` where `T_α` is an
//! orthonormal basis of the Lie algebra under `tr(a^* b)`, `e_k(p) =
//! e^{i k.p} / (2π)` and the `c_{α,k}` are the smoothed Gaussian modes of
//! [`crate::gaussian`]. The scalar covariance between two points is then
//! `(2 / t^2) torus_kernel(s, N, p, q)`.
//!
//! The quantity computed is
//! `E[ u_z tr(φ^* a(z)) · u_w tr(a(w)^* φ') · prod_i (Ĥ_i - E Ĥ_i) ]` with
//! `Ĥ_i = tr(a(z_i)^* x_i a(z_i))`. Its expansion over cycles-and-chain
//! partitions is [`frenkel_zhu_rhs`]; [`gaussian_moment_oracle`] evaluates
//! the same expectation by summing every complete Wick contraction through
//! the explicit completeness projector of the basis.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::{self, GaussianSpec};
use crate::mc::{self, domain, McEstimate};
use crate::spectral::{laplace_symbol, FreqIndex, SpectralField};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// All permutations of `0..k` in lexicographic order.
fn permutations(k: usize) -> Vec<Vec<usize>> {
    fn go(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                go(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::with_capacity(k), &mut vec![false; k], &mut out);
    out
}

fn factorial(n: usize) -> u128 {
    (1..=n as u128).product()
}

// ---------------------------------------------------------------------------
// Pairings

/// Bijection from `{0..k}` onto `{k..2k}`; `map[a] = b`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PairingPartition {
    pub k: usize,
    pub map: Vec<usize>,
}

pub const MAX_PAIRING_K: usize = 8;

pub fn enumerate_pairings(k: usize) -> Result<Vec<PairingPartition>> {
    if k > MAX_PAIRING_K {
        return Err(Error::OutOfRange(format!("pairing order {k} > {MAX_PAIRING_K}")));
    }
    Ok(permutations(k)
        .into_iter()
        .map(|p| PairingPartition { k, map: p.into_iter().map(|b| b + k).collect() })
        .collect())
}

/// `E[prod_a L_a prod_b conj(L_b)] = sum_pairings prod cov(a, b)` for a
/// centered complex Gaussian with `E[L L] = 0`.
pub fn wick_expectation<T>(holo: &[T], anti: &[T], cov: impl Fn(&T, &T) -> Complex64) -> Result<Complex64> {
    if holo.len() != anti.len() {
        return Err(Error::DimensionMismatch { expected: holo.len(), got: anti.len() });
    }
    let k = holo.len();
    let table: Vec<Vec<Complex64>> = holo.iter().map(|a| anti.iter().map(|b| cov(a, b)).collect()).collect();
    Ok(enumerate_pairings(k)?
        .iter()
        .map(|q| q.map.iter().enumerate().map(|(a, &b)| table[a][b - k]).product::<Complex64>())
        .sum())
}

/// `E[L_φ conj(L_ψ)]` with `L_φ(A) = <φ, A>` under the smoothed measure:
/// `sum_k E|c_k|^2 conj(φ_k) ψ_k`.
pub fn measured_covariance(spec: &GaussianSpec) -> impl Fn(&SpectralField, &SpectralField) -> Complex64 + '_ {
    move |phi, psi| {
        phi.modes()
            .zip(psi.coeffs())
            .map(|((k, a), b)| a.conj() * b * spec.mode_variance(k))
            .sum()
    }
}

// ---------------------------------------------------------------------------
// Cycles and one chain

/// A partition of `{0..n}` into cycles (rotated so that the smallest element
/// comes first, sorted by that element) and one ordered, possibly empty,
/// chain.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CyclesChainPartition {
    pub cycles: Vec<Vec<usize>>,
    pub chain: Vec<usize>,
}

pub const MAX_PARTITION_N: usize = 7;

fn cycle_covers(rest: &[usize], min_len: usize) -> Vec<Vec<Vec<usize>>> {
    let Some((&first, others)) = rest.split_first() else {
        return vec![Vec::new()];
    };
    let mut out = Vec::new();
    // choose the ordered tail of the cycle through `first`
    for mask in 0u32..(1 << others.len()) {
        let chosen: Vec<usize> = others.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &e)| e).collect();
        if chosen.len() + 1 < min_len {
            continue;
        }
        let left: Vec<usize> = others.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 0).map(|(_, &e)| e).collect();
        let tails = cycle_covers(&left, min_len);
        for order in permutations(chosen.len()) {
            let mut cyc = vec![first];
            cyc.extend(order.iter().map(|&i| chosen[i]));
            for t in &tails {
                let mut cs = vec![cyc.clone()];
                cs.extend(t.iter().cloned());
                out.push(cs);
            }
        }
    }
    out
}

pub fn enumerate_cycles_chain(n: usize, min_cycle_len: usize) -> Result<Vec<CyclesChainPartition>> {
    if n > MAX_PARTITION_N {
        return Err(Error::OutOfRange(format!("partition size {n} > {MAX_PARTITION_N}")));
    }
    if !(1..=2).contains(&min_cycle_len) {
        return Err(Error::OutOfRange(format!("min_cycle_len {min_cycle_len} not in {{1, 2}}")));
    }
    let mut out = Vec::new();
    for mask in 0u32..(1 << n) {
        let in_chain: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
        let rest: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 0).collect();
        let covers = cycle_covers(&rest, min_cycle_len);
        for order in permutations(in_chain.len()) {
            let chain: Vec<usize> = order.iter().map(|&i| in_chain[i]).collect();
            for cycles in &covers {
                out.push(CyclesChainPartition { cycles: cycles.clone(), chain: chain.clone() });
            }
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Kernels and data

/// `(2π)^{-2} sum_{|k_i| <= N} (1 + |k|^2)^{-2s} e^{i k.(z - z')}`.
pub fn torus_kernel(s: f64, trunc: usize, z: [f64; 2], zp: [f64; 2]) -> Result<Complex64> {
    if !(s > 0.5 && s.is_finite()) {
        return Err(Error::OutOfRange(format!("kernel exponent s = {s} must exceed 1/2")));
    }
    if trunc < 1 {
        return Err(Error::OutOfRange("trunc must be at least 1".into()));
    }
    let d = [z[0] - zp[0], z[1] - zp[1]];
    let n = trunc as i64;
    let mut sum = ZERO;
    for k1 in -n..=n {
        for k2 in -n..=n {
            let k = FreqIndex::new(k1, k2);
            sum += Complex64::from_polar(laplace_symbol(k).powf(-2.0 * s), k1 as f64 * d[0] + k2 as f64 * d[1]);
        }
    }
    Ok(sum / (4.0 * PI * PI))
}

/// Pairwise kernel values `c(p_i, p_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelTable {
    points: Vec<[f64; 2]>,
    values: DMatrix<Complex64>,
}

impl KernelTable {
    pub fn new(points: Vec<[f64; 2]>, values: DMatrix<Complex64>) -> Result<Self> {
        let n = points.len();
        if values.nrows() != n || values.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, got: values.nrows() });
        }
        if !values.iter().all(|c| c.re.is_finite() && c.im.is_finite()) {
            return Err(Error::NonFinite("kernel values"));
        }
        let dev = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| (values[(i, j)] - values[(j, i)].conj()).norm())
            .fold(0.0, f64::max);
        if dev > 1e-12 * values.iter().map(|c| c.norm()).fold(1.0, f64::max) {
            return Err(Error::NotHermitian(dev));
        }
        Ok(Self { points, values })
    }

    /// Covariance kernel of the smoothed field: `(2 / t^2) torus_kernel`.
    pub fn from_spec(spec: &GaussianSpec, points: Vec<[f64; 2]>) -> Result<Self> {
        spec.validate()?;
        let n = points.len();
        let w = 2.0 / (spec.scale * spec.scale);
        let mut values = DMatrix::from_element(n, n, ZERO);
        for i in 0..n {
            for j in i..n {
                let c = torus_kernel(spec.smooth, spec.trunc, points[i], points[j])? * w;
                values[(i, j)] = c;
                values[(j, i)] = c.conj();
            }
            values[(i, i)] = Complex64::new(values[(i, i)].re, 0.0);
        }
        Self::new(points, values)
    }

    pub fn points(&self) -> &[[f64; 2]] {
        &self.points
    }

    pub fn get(&self, i: usize, j: usize) -> Result<Complex64> {
        let n = self.points.len();
        if i >= n {
            return Err(Error::MissingKernelEntry(i));
        }
        if j >= n {
            return Err(Error::MissingKernelEntry(j));
        }
        Ok(self.values[(i, j)])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algebra {
    Sl,
    Gl,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LieBasisSpec {
    pub n: usize,
    pub algebra: Algebra,
}

impl LieBasisSpec {
    pub fn new(n: usize, algebra: Algebra) -> Result<Self> {
        if n < 2 {
            return Err(Error::OutOfRange(format!("matrix size {n} < 2")));
        }
        Ok(Self { n, algebra })
    }

    pub fn dim(&self) -> usize {
        match self.algebra {
            Algebra::Gl => self.n * self.n,
            Algebra::Sl => self.n * self.n - 1,
        }
    }

    /// Orthonormal basis under `tr(a^* b)`: matrix units, with the diagonal
    /// replaced by generalized Gell-Mann matrices for `sl`.
    pub fn basis(&self) -> Vec<DMatrix<Complex64>> {
        let n = self.n;
        let unit = |i: usize, j: usize| {
            let mut m = DMatrix::from_element(n, n, ZERO);
            m[(i, j)] = ONE;
            m
        };
        let mut out = Vec::with_capacity(self.dim());
        for i in 0..n {
            for j in 0..n {
                if i != j || self.algebra == Algebra::Gl {
                    out.push(unit(i, j));
                }
            }
        }
        if self.algebra == Algebra::Sl {
            for m in 1..n {
                let norm = 1.0 / ((m * (m + 1)) as f64).sqrt();
                let mut h = DMatrix::from_element(n, n, ZERO);
                for i in 0..m {
                    h[(i, i)] = Complex64::new(norm, 0.0);
                }
                h[(m, m)] = Complex64::new(-(m as f64) * norm, 0.0);
                out.push(h);
            }
        }
        out
    }

    /// `G[A][B] = sum_α T_α[A] conj(T_α[B])` on row-major vectorized
    /// matrices; `E[a_A conj(a_B)] = G[A][B] c`.
    pub fn projector(&self) -> DMatrix<Complex64> {
        let nn = self.n * self.n;
        let mut g = DMatrix::from_element(nn, nn, ZERO);
        for t in self.basis() {
            let v = vec_row_major(&t);
            for a in 0..nn {
                for b in 0..nn {
                    g[(a, b)] += v[a] * v[b].conj();
                }
            }
        }
        g
    }
}

fn max_abs(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

fn vec_row_major(m: &DMatrix<Complex64>) -> Vec<Complex64> {
    (0..m.nrows()).flat_map(|i| (0..m.ncols()).map(move |j| m[(i, j)])).collect()
}

/// Endpoint data: `φ(z)`, `φ'(w)` and the scalar contractions at `z` and `w`.
#[derive(Debug, Clone, PartialEq)]
pub struct VData {
    pub phi: DMatrix<Complex64>,
    pub phi_prime: DMatrix<Complex64>,
    pub endpoint_z: Complex64,
    pub endpoint_w: Complex64,
}

/// Factor attached to each cycle in [`frenkel_zhu_rhs`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum LoopWeight {
    /// Each cycle carries `tr(1) = n`, as the `gl` contraction produces.
    #[default]
    Dimension,
    /// Cycles carry only the trace of their insertions.
    Unit,
}

fn check_inputs(x: &[DMatrix<Complex64>], vdata: &VData, basis: &LieBasisSpec) -> Result<()> {
    let n = basis.n;
    for m in x.iter().chain([&vdata.phi, &vdata.phi_prime]) {
        if m.nrows() != n || m.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, got: m.nrows() });
        }
        if !m.iter().all(|c| c.re.is_finite() && c.im.is_finite()) {
            return Err(Error::NonFinite("matrix entries"));
        }
    }
    for m in x {
        let dev = max_abs(&(m - m.adjoint()));
        if dev > 1e-10 {
            return Err(Error::NotHermitian(dev));
        }
    }
    Ok(())
}

/// Sum over cycles-and-chain partitions. Kernel point 0 is `z`, point 1 is
/// `w`, point `2 + i` is `z_i`.
pub fn frenkel_zhu_rhs(
    x: &[DMatrix<Complex64>],
    kernel: &KernelTable,
    vdata: &VData,
    basis: &LieBasisSpec,
    min_cycle_len: usize,
    loop_weight: LoopWeight,
) -> Result<Complex64> {
    check_inputs(x, vdata, basis)?;
    let n = x.len();
    let pt = |i: usize| i + 2;
    if kernel.points().len() < n + 2 {
        return Err(Error::MissingKernelEntry(kernel.points().len()));
    }
    let weight = match loop_weight {
        LoopWeight::Dimension => basis.n as f64,
        LoopWeight::Unit => 1.0,
    };
    let phi_adj = vdata.phi.adjoint();
    let mut total = ZERO;
    for alpha in enumerate_cycles_chain(n, min_cycle_len)? {
        let mut term = vdata.endpoint_z * vdata.endpoint_w;
        for cyc in &alpha.cycles {
            let mut prod = DMatrix::identity(basis.n, basis.n);
            for &a in cyc {
                prod *= &x[a];
            }
            term *= prod.trace() * weight;
            for (i, &a) in cyc.iter().enumerate() {
                let b = cyc[(i + 1) % cyc.len()];
                term *= kernel.get(pt(a), pt(b))?;
            }
        }
        let mut chain = phi_adj.clone();
        for &b in &alpha.chain {
            chain *= &x[b];
        }
        term *= (chain * &vdata.phi_prime).trace();
        let mut prev = 0;
        for &b in &alpha.chain {
            term *= kernel.get(prev, pt(b))?;
            prev = pt(b);
        }
        term *= kernel.get(prev, 1)?;
        total += term;
    }
    Ok(total)
}

// ---------------------------------------------------------------------------
// Oracle

pub const ORACLE_MAX_N: usize = 4;
pub const ORACLE_MAX_TRUNC: usize = 6;
pub const ORACLE_TERM_CAP: u128 = 10_000_000;

/// Covariance `E[comp(p) conj(comp(q))]` of one basis component, summed
/// mode by mode with the orthonormal basis functions.
fn point_covariance(spec: &GaussianSpec, p: [f64; 2], q: [f64; 2]) -> Complex64 {
    let n = spec.trunc as i64;
    let mut sum = ZERO;
    for k1 in -n..=n {
        for k2 in -n..=n {
            let k = FreqIndex::new(k1, k2);
            let ep = Complex64::from_polar(1.0 / (2.0 * PI), k1 as f64 * p[0] + k2 as f64 * p[1]);
            let eq = Complex64::from_polar(1.0 / (2.0 * PI), k1 as f64 * q[0] + k2 as f64 * q[1]);
            sum += ep * eq.conj() * spec.mode_variance(k);
        }
    }
    sum
}

fn kron_left(x: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let n = x.nrows();
    DMatrix::from_fn(n * n, n * n, |a, b| if a % n == b % n { x[(a / n, b / n)] } else { ZERO })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleValue {
    pub value: Complex64,
    /// Number of complete contractions summed.
    pub patterns: usize,
}

/// Exact Isserlis evaluation of the correlation. `points` lists `z`, `w`,
/// then `z_1..z_n`. With `centered` false the `Ĥ_i` are not centered and
/// self-contractions are kept.
pub fn gaussian_moment_oracle(
    x: &[DMatrix<Complex64>],
    points: &[[f64; 2]],
    vdata: &VData,
    spec: &GaussianSpec,
    basis: &LieBasisSpec,
    centered: bool,
) -> Result<OracleValue> {
    check_inputs(x, vdata, basis)?;
    spec.validate()?;
    let n = x.len();
    if n > ORACLE_MAX_N {
        return Err(Error::OutOfRange(format!("oracle insertion count {n} > {ORACLE_MAX_N}")));
    }
    if spec.trunc > ORACLE_MAX_TRUNC {
        return Err(Error::OutOfRange(format!("oracle truncation {} > {ORACLE_MAX_TRUNC}", spec.trunc)));
    }
    if points.len() < n + 2 {
        return Err(Error::MissingKernelEntry(points.len()));
    }
    let terms = factorial(n + 1);
    if terms > ORACLE_TERM_CAP {
        return Err(Error::TermCap { count: terms, cap: ORACLE_TERM_CAP });
    }
    let g = basis.projector();
    let q: Vec<DMatrix<Complex64>> = x.iter().map(kron_left).collect();
    let gq: Vec<DMatrix<Complex64>> = q.iter().map(|qi| &g * qi).collect();
    let left = DMatrix::from_row_slice(1, g.nrows(), &vec_row_major(&vdata.phi).iter().map(|c| c.conj()).collect::<Vec<_>>());
    let right = DMatrix::from_column_slice(g.nrows(), 1, &vec_row_major(&vdata.phi_prime));

    // a-slots: 0 = z, i = z_i; a*-slots: 0 = w, i = z_i
    let a_point = |i: usize| if i == 0 { points[0] } else { points[i + 1] };
    let b_point = |j: usize| if j == 0 { points[1] } else { points[j + 1] };
    let cov: Vec<Vec<Complex64>> =
        (0..=n).map(|i| (0..=n).map(|j| point_covariance(spec, a_point(i), b_point(j))).collect()).collect();

    let mut total = ZERO;
    let mut patterns = 0;
    for sigma in permutations(n + 1) {
        if centered && (1..=n).any(|i| sigma[i] == i) {
            continue;
        }
        patterns += 1;
        let mut term = vdata.endpoint_z * vdata.endpoint_w;
        for (i, &j) in sigma.iter().enumerate() {
            term *= cov[i][j];
        }
        // chain from the z-slot until it reaches w
        let mut seen = vec![false; n + 1];
        let mut row = left.clone();
        let mut j = sigma[0];
        seen[0] = true;
        while j != 0 {
            row = row * &gq[j - 1];
            seen[j] = true;
            j = sigma[j];
        }
        term *= (row * &g * &right)[(0, 0)];
        for start in 1..=n {
            if seen[start] {
                continue;
            }
            let mut m = DMatrix::identity(g.nrows(), g.nrows());
            let mut i = start;
            loop {
                seen[i] = true;
                m = m * &q[i - 1] * &g;
                i = sigma[i];
                if i == start {
                    break;
                }
            }
            term *= m.trace();
        }
        total += term;
    }
    Ok(OracleValue { value: total, patterns })
}

/// `E Ĥ_{x,p} = tr(Q G) c(p, p)`.
fn h_mean(x: &DMatrix<Complex64>, g: &DMatrix<Complex64>, var: f64) -> Complex64 {
    (kron_left(x) * g).trace() * var
}

/// Monte Carlo estimate of the oracle quantity from `n_samples` draws of the
/// matrix field.
pub fn moment_mc(
    x: &[DMatrix<Complex64>],
    points: &[[f64; 2]],
    vdata: &VData,
    spec: &GaussianSpec,
    basis: &LieBasisSpec,
    n_samples: usize,
    seed: u64,
) -> Result<McEstimate> {
    check_inputs(x, vdata, basis)?;
    spec.validate()?;
    let n = x.len();
    if points.len() < n + 2 {
        return Err(Error::MissingKernelEntry(points.len()));
    }
    let tb = basis.basis();
    let field_spec = GaussianSpec { rank: tb.len(), ..*spec };
    let g = basis.projector();
    let means: Vec<Complex64> =
        x.iter().enumerate().map(|(i, xi)| h_mean(xi, &g, point_covariance(spec, points[i + 2], points[i + 2]).re)).collect();
    let waves: Vec<Vec<Complex64>> = points[..n + 2]
        .iter()
        .map(|p| {
            SpectralField::zeros(spec.trunc)
                .modes()
                .map(|(k, _)| Complex64::from_polar(1.0 / (2.0 * PI), k.k1 as f64 * p[0] + k.k2 as f64 * p[1]))
                .collect()
        })
        .collect();
    let phi_adj = vdata.phi.adjoint();
    let sampler = gaussian::Sampler::new(&field_spec);
    let samples = mc::par_samples(n_samples, |i| {
        let comps = sampler.draw(seed, domain::LIE_NOISE, i);
        let at = |p: usize| -> DMatrix<Complex64> {
            let mut m = DMatrix::from_element(basis.n, basis.n, ZERO);
            for (t, f) in tb.iter().zip(&comps) {
                let v: Complex64 = f.coeffs().iter().zip(&waves[p]).map(|(c, e)| c * e).sum();
                m += t * v;
            }
            m
        };
        let az = at(0);
        let aw = at(1);
        let mut val = vdata.endpoint_z * (&phi_adj * az).trace() * vdata.endpoint_w * (aw.adjoint() * &vdata.phi_prime).trace();
        for (j, xj) in x.iter().enumerate() {
            let a = at(j + 2);
            val *= (a.adjoint() * xj * &a).trace() - means[j];
        }
        val
    });
    McEstimate::from_samples(&samples)
}

/// Relative deviation of the partition sum from the oracle under each
/// completeness relation and cycle weight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConventionReport {
    pub gl_dimension: f64,
    pub gl_unit: f64,
    pub sl_dimension: f64,
    pub sl_unit: f64,
}

pub fn relative_deviation(a: Complex64, b: Complex64) -> f64 {
    let scale = a.norm().max(b.norm());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).norm() / scale
    }
}

/// Compares both cycle weights against the oracle under both algebras; the
/// same `x`, points and endpoint data are used throughout.
pub fn compare_conventions(
    x: &[DMatrix<Complex64>],
    points: &[[f64; 2]],
    vdata: &VData,
    spec: &GaussianSpec,
) -> Result<ConventionReport> {
    let n = vdata.phi.nrows();
    let kernel = KernelTable::from_spec(spec, points.to_vec())?;
    let dev = |alg: Algebra, w: LoopWeight| -> Result<f64> {
        let basis = LieBasisSpec::new(n, alg)?;
        let rhs = frenkel_zhu_rhs(x, &kernel, vdata, &basis, 2, w)?;
        let oracle = gaussian_moment_oracle(x, points, vdata, spec, &basis, true)?.value;
        Ok(relative_deviation(rhs, oracle))
    };
    Ok(ConventionReport {
        gl_dimension: dev(Algebra::Gl, LoopWeight::Dimension)?,
        gl_unit: dev(Algebra::Gl, LoopWeight::Unit)?,
        sl_dimension: dev(Algebra::Sl, LoopWeight::Dimension)?,
        sl_unit: dev(Algebra::Sl, LoopWeight::Unit)?,
    })
}
