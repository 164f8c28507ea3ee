//! Truncated Fourier representation of fields on the flat torus `(R / 2πZ)^2`.
//!
//! A field with truncation `N` stores one complex coefficient per wave vector
//! `k = (k1, k2)` with `|k1|, |k2| <= N`, row-major in `(k1, k2)` from
//! `(-N, -N)` to `(N, N)`. Point values are `f(x) = sum_k c_k e^{i k.x}`, so a
//! constant field `c` has coefficient `c` at `k = 0`, and products of fields
//! are plain coefficient convolutions. Fields are complex-valued: no Hermitian
//! symmetry is imposed.
//!
//! `-Δ` has eigenvalue `|k|^2` on `e^{i k.x}` and `∂ = (∂_x - i ∂_y) / 2`
//! acts by the multiplier `(i/2)(k1 - i k2)`.

use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FreqIndex {
    pub k1: i64,
    pub k2: i64,
}

impl FreqIndex {
    pub const ZERO: FreqIndex = FreqIndex { k1: 0, k2: 0 };

    pub fn new(k1: i64, k2: i64) -> Self {
        Self { k1, k2 }
    }

    pub fn norm_sq(self) -> f64 {
        (self.k1 * self.k1 + self.k2 * self.k2) as f64
    }

    pub fn neg(self) -> Self {
        Self::new(-self.k1, -self.k2)
    }

    pub fn fits(self, trunc: usize) -> bool {
        let n = trunc as i64;
        self.k1.abs() <= n && self.k2.abs() <= n
    }
}

/// Number of modes `(2N + 1)^2` for truncation `N`.
pub fn mode_count(trunc: usize) -> usize {
    (2 * trunc + 1) * (2 * trunc + 1)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    trunc: usize,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(trunc: usize) -> Self {
        Self { trunc, coeffs: vec![ZERO; mode_count(trunc)] }
    }

    pub fn from_coeffs(trunc: usize, coeffs: Vec<Complex64>) -> Result<Self> {
        if trunc == 0 {
            return Err(Error::OutOfRange("truncation must be at least 1".into()));
        }
        if coeffs.len() != mode_count(trunc) {
            return Err(Error::DimensionMismatch { expected: mode_count(trunc), got: coeffs.len() });
        }
        if !coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite()) {
            return Err(Error::NonFinite("field coefficients"));
        }
        Ok(Self { trunc, coeffs })
    }

    pub fn from_fn(trunc: usize, mut f: impl FnMut(FreqIndex) -> Complex64) -> Self {
        let side = 2 * trunc as i64 + 1;
        let n = trunc as i64;
        let coeffs = (0..side * side)
            .map(|i| f(FreqIndex::new(i / side - n, i % side - n)))
            .collect();
        Self { trunc, coeffs }
    }

    pub fn constant(trunc: usize, value: Complex64) -> Self {
        let mut f = Self::zeros(trunc);
        let i = f.index_of(FreqIndex::ZERO).unwrap();
        f.coeffs[i] = value;
        f
    }

    pub fn single_mode(trunc: usize, k: FreqIndex, value: Complex64) -> Self {
        let mut f = Self::zeros(trunc);
        if let Some(i) = f.index_of(k) {
            f.coeffs[i] = value;
        }
        f
    }

    pub fn trunc(&self) -> usize {
        self.trunc
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    pub fn index_of(&self, k: FreqIndex) -> Option<usize> {
        index_in(self.trunc, k)
    }

    pub fn freq(&self, i: usize) -> FreqIndex {
        freq_at(self.trunc, i)
    }

    /// Coefficient at `k`, zero outside the truncation.
    pub fn get(&self, k: FreqIndex) -> Complex64 {
        self.index_of(k).map_or(ZERO, |i| self.coeffs[i])
    }

    pub fn modes(&self) -> impl Iterator<Item = (FreqIndex, Complex64)> + '_ {
        self.coeffs.iter().enumerate().map(move |(i, &c)| (freq_at(self.trunc, i), c))
    }

    /// Applies a diagonal multiplier `m(k)` mode by mode.
    pub fn map_modes(&self, mut m: impl FnMut(FreqIndex, Complex64) -> Complex64) -> Self {
        let coeffs = self.modes().map(|(k, c)| m(k, c)).collect();
        Self { trunc: self.trunc, coeffs }
    }

    pub fn scale(&self, a: Complex64) -> Self {
        self.map_modes(|_, c| a * c)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip(other, |a, b| a - b)
    }

    fn zip(&self, other: &Self, op: impl Fn(Complex64, Complex64) -> Complex64) -> Result<Self> {
        check_same(self, other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(&a, &b)| op(a, b)).collect();
        Ok(Self { trunc: self.trunc, coeffs })
    }

    /// L2 norm `sqrt(sum |c_k|^2)`.
    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Zero-pads or truncates to a new square truncation.
    pub fn resized(&self, trunc: usize) -> Self {
        Self::from_fn(trunc, |k| self.get(k))
    }

    /// Interleaved real coordinates `(Re c_0, Im c_0, Re c_1, ...)`.
    pub fn to_real(&self) -> DVector<f64> {
        DVector::from_iterator(2 * self.len(), self.coeffs.iter().flat_map(|c| [c.re, c.im]))
    }

    pub fn from_real(trunc: usize, v: &DVector<f64>) -> Result<Self> {
        if v.len() != 2 * mode_count(trunc) {
            return Err(Error::DimensionMismatch { expected: 2 * mode_count(trunc), got: v.len() });
        }
        let coeffs = v.as_slice().chunks_exact(2).map(|p| Complex64::new(p[0], p[1])).collect();
        Self::from_coeffs(trunc, coeffs)
    }

    /// Point value `sum_k c_k e^{i k.x}`.
    pub fn eval_at(&self, x: [f64; 2]) -> Complex64 {
        self.modes()
            .map(|(k, c)| c * Complex64::from_polar(1.0, k.k1 as f64 * x[0] + k.k2 as f64 * x[1]))
            .sum()
    }
}

fn index_in(trunc: usize, k: FreqIndex) -> Option<usize> {
    if !k.fits(trunc) {
        return None;
    }
    let n = trunc as i64;
    let side = 2 * n + 1;
    Some(((k.k1 + n) * side + (k.k2 + n)) as usize)
}

fn freq_at(trunc: usize, i: usize) -> FreqIndex {
    let n = trunc as i64;
    let side = 2 * n + 1;
    let i = i as i64;
    FreqIndex::new(i / side - n, i % side - n)
}

fn check_same(a: &SpectralField, b: &SpectralField) -> Result<()> {
    if a.trunc != b.trunc {
        return Err(Error::DimensionMismatch { expected: a.len(), got: b.len() });
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Diagonal operators

pub fn laplace_symbol(k: FreqIndex) -> f64 {
    1.0 + k.norm_sq()
}

/// `(1 - Δ)^p`: multiplies the coefficient at `k` by `(1 + |k|^2)^p`.
pub fn laplacian_power(f: &SpectralField, p: f64) -> SpectralField {
    f.map_modes(|k, c| c * laplace_symbol(k).powf(p))
}

pub fn del_symbol(k: FreqIndex) -> Complex64 {
    Complex64::new(0.0, 0.5) * Complex64::new(k.k1 as f64, -(k.k2 as f64))
}

pub fn delbar_symbol(k: FreqIndex) -> Complex64 {
    Complex64::new(0.0, 0.5) * Complex64::new(k.k1 as f64, k.k2 as f64)
}

/// `∂ = (∂_x - i ∂_y) / 2`.
pub fn del(f: &SpectralField) -> SpectralField {
    f.map_modes(|k, c| c * del_symbol(k))
}

/// `∂̄ = (∂_x + i ∂_y) / 2`.
pub fn delbar(f: &SpectralField) -> SpectralField {
    f.map_modes(|k, c| c * delbar_symbol(k))
}

/// Flat Laplacian `Δ` (multiplier `-|k|^2`).
pub fn laplacian(f: &SpectralField) -> SpectralField {
    f.map_modes(|k, c| c * -k.norm_sq())
}

/// Pointwise complex conjugate: coefficient at `k` becomes `conj(c_{-k})`.
pub fn conjugate_field(f: &SpectralField) -> SpectralField {
    SpectralField::from_fn(f.trunc, |k| f.get(k.neg()).conj())
}

/// `sum_k conj(f_k) g_k`.
pub fn l2_inner(f: &SpectralField, g: &SpectralField) -> Result<Complex64> {
    check_same(f, g)?;
    Ok(f.coeffs.iter().zip(&g.coeffs).map(|(a, b)| a.conj() * b).sum())
}

/// `sqrt(sum_k (1 + |k|^2)^lam |f_k|^2)`.
pub fn sobolev_norm(f: &SpectralField, lam: f64) -> f64 {
    f.modes()
        .map(|(k, c)| laplace_symbol(k).powf(lam) * c.norm_sqr())
        .sum::<f64>()
        .sqrt()
}

// ---------------------------------------------------------------------------
// Collocation grid

struct Fft2 {
    g: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

thread_local! {
    static PLANS: RefCell<HashMap<usize, Arc<Fft2>>> = RefCell::new(HashMap::new());
}

fn plan(g: usize) -> Arc<Fft2> {
    PLANS.with(|p| {
        p.borrow_mut()
            .entry(g)
            .or_insert_with(|| {
                let mut planner = FftPlanner::new();
                Arc::new(Fft2 { g, fwd: planner.plan_fft_forward(g), inv: planner.plan_fft_inverse(g) })
            })
            .clone()
    })
}

fn transpose(buf: &mut [Complex64], g: usize) {
    for i in 0..g {
        for j in (i + 1)..g {
            buf.swap(i * g + j, j * g + i);
        }
    }
}

impl Fft2 {
    fn run(&self, buf: &mut [Complex64], forward: bool) {
        let f = if forward { &self.fwd } else { &self.inv };
        f.process(buf);
        transpose(buf, self.g);
        f.process(buf);
        transpose(buf, self.g);
    }

    /// Point values on the `g x g` grid `x = 2π (j1, j2) / g`.
    fn to_grid(&self, f: &SpectralField) -> Vec<Complex64> {
        let g = self.g as i64;
        let mut buf = vec![ZERO; self.g * self.g];
        for (k, c) in f.modes() {
            let r = k.k1.rem_euclid(g) as usize;
            let s = k.k2.rem_euclid(g) as usize;
            buf[r * self.g + s] += c;
        }
        self.run(&mut buf, false);
        buf
    }

    fn from_grid(&self, mut buf: Vec<Complex64>, trunc: usize) -> SpectralField {
        self.run(&mut buf, true);
        let g = self.g as i64;
        let norm = 1.0 / (self.g * self.g) as f64;
        SpectralField::from_fn(trunc, |k| {
            buf[k.k1.rem_euclid(g) as usize * self.g + k.k2.rem_euclid(g) as usize] * norm
        })
    }
}

/// Smallest grid on which a degree-`degree` expression in fields of band
/// `band_in` projects exactly onto band `band_out`, and no smaller than
/// `degree * (2 * band_in + 1)`.
fn grid_size(degree: usize, band_in: usize, band_out: usize) -> usize {
    let d = degree.max(1);
    (d * (2 * band_in + 1)).max(d * band_in + band_out + 1)
}

/// Alias-free projection of the pointwise polynomial `poly(f)` onto `f`'s
/// truncation.
pub fn apply_polynomial(f: &SpectralField, poly: &[Complex64]) -> Result<SpectralField> {
    apply_polynomial_to(f, poly, f.trunc)
}

/// As [`apply_polynomial`], projecting onto truncation `out_trunc`. With
/// `out_trunc >= degree * N` the result is the exact expansion.
pub fn apply_polynomial_to(
    f: &SpectralField,
    poly: &[Complex64],
    out_trunc: usize,
) -> Result<SpectralField> {
    poly::check_finite(poly)?;
    let p = poly::trimmed(poly);
    let d = p.len() - 1;
    if d == 0 {
        return Ok(SpectralField::constant(out_trunc, p[0]));
    }
    let zero_mode = index_in(f.trunc, FreqIndex::ZERO).expect("zero mode");
    if f.coeffs.iter().enumerate().all(|(i, &c)| i == zero_mode || c == ZERO) {
        return Ok(SpectralField::constant(out_trunc, poly::eval(&p, f.coeffs[zero_mode])));
    }
    let fft = plan(grid_size(d, f.trunc, out_trunc));
    let mut vals = fft.to_grid(f);
    for v in vals.iter_mut() {
        *v = poly::eval(&p, *v);
    }
    Ok(fft.from_grid(vals, out_trunc))
}

/// Alias-free product `f g` projected onto `out_trunc`.
pub fn multiply(f: &SpectralField, g: &SpectralField, out_trunc: usize) -> SpectralField {
    let band = f.trunc.max(g.trunc);
    let fft = plan(grid_size(2, band, out_trunc));
    let a = fft.to_grid(f);
    let b = fft.to_grid(g);
    let prod = a.iter().zip(&b).map(|(x, y)| x * y).collect();
    fft.from_grid(prod, out_trunc)
}

// ---------------------------------------------------------------------------
// Realified operators

/// Real-linear operator on a truncated field space, as a dense real matrix
/// acting on interleaved `(Re c_k, Im c_k)` coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct RealifiedOperator {
    trunc: usize,
    matrix: DMatrix<f64>,
}

impl RealifiedOperator {
    pub fn new(trunc: usize, matrix: DMatrix<f64>) -> Result<Self> {
        let dim = 2 * mode_count(trunc);
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: matrix.nrows() });
        }
        if !matrix.iter().all(|x| x.is_finite()) {
            return Err(Error::NonFinite("operator entries"));
        }
        Ok(Self { trunc, matrix })
    }

    pub fn identity(trunc: usize) -> Self {
        let dim = 2 * mode_count(trunc);
        Self { trunc, matrix: DMatrix::identity(dim, dim) }
    }

    /// Complex-linear diagonal operator `c_k -> m(k) c_k`.
    pub fn diagonal(trunc: usize, m: impl Fn(FreqIndex) -> Complex64) -> Self {
        let dim = 2 * mode_count(trunc);
        let mut matrix = DMatrix::zeros(dim, dim);
        for i in 0..mode_count(trunc) {
            let a = m(freq_at(trunc, i));
            set_block(&mut matrix, i, i, complex_block(a));
        }
        Self { trunc, matrix }
    }

    pub fn trunc(&self) -> usize {
        self.trunc
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.matrix
    }

    pub fn apply(&self, f: &SpectralField) -> Result<SpectralField> {
        if f.trunc != self.trunc {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: 2 * f.len() });
        }
        SpectralField::from_real(self.trunc, &(&self.matrix * f.to_real()))
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.trunc != other.trunc {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: other.dim() });
        }
        Ok(Self { trunc: self.trunc, matrix: &self.matrix * &other.matrix })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.trunc != other.trunc {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: other.dim() });
        }
        Ok(Self { trunc: self.trunc, matrix: &self.matrix + &other.matrix })
    }

    /// Left-multiplies by a real diagonal multiplier `w(k)` (same on both
    /// real coordinates of mode `k`).
    pub fn scale_rows(&self, w: impl Fn(FreqIndex) -> f64) -> Self {
        let mut matrix = self.matrix.clone();
        for i in 0..mode_count(self.trunc) {
            let s = w(freq_at(self.trunc, i));
            matrix.row_mut(2 * i).scale_mut(s);
            matrix.row_mut(2 * i + 1).scale_mut(s);
        }
        Self { trunc: self.trunc, matrix }
    }

    /// If the operator commutes with multiplication by `i` it is the
    /// realification of a complex matrix, which is returned.
    pub fn complex_part(&self, tol: f64) -> Option<DMatrix<Complex64>> {
        let m = mode_count(self.trunc);
        let mut out = DMatrix::zeros(m, m);
        for i in 0..m {
            for j in 0..m {
                let a = self.matrix[(2 * i, 2 * j)];
                let b = self.matrix[(2 * i, 2 * j + 1)];
                let c = self.matrix[(2 * i + 1, 2 * j)];
                let d = self.matrix[(2 * i + 1, 2 * j + 1)];
                if (a - d).abs() > tol || (b + c).abs() > tol {
                    return None;
                }
                out[(i, j)] = Complex64::new(a, c);
            }
        }
        Some(out)
    }
}

/// Realification of multiplication by `a`.
fn complex_block(a: Complex64) -> [[f64; 2]; 2] {
    [[a.re, -a.im], [a.im, a.re]]
}

/// Realification of `z -> a conj(z)`.
fn conj_block(a: Complex64) -> [[f64; 2]; 2] {
    [[a.re, a.im], [a.im, -a.re]]
}

fn set_block(m: &mut DMatrix<f64>, i: usize, j: usize, b: [[f64; 2]; 2]) {
    m[(2 * i, 2 * j)] = b[0][0];
    m[(2 * i, 2 * j + 1)] = b[0][1];
    m[(2 * i + 1, 2 * j)] = b[1][0];
    m[(2 * i + 1, 2 * j + 1)] = b[1][1];
}

/// Realified matrix of `δ -> P_N(ψ δ)` (or `δ -> P_N(ψ conj(δ))` when
/// `conjugate_argument` is set) on truncation `trunc`, where `P_N` is the
/// exact projection onto `|k_i| <= N`.
///
/// `ψ` may carry a wider band than `trunc`; all of its modes enter the
/// convolution.
pub fn multiplication_operator(
    psi: &SpectralField,
    trunc: usize,
    conjugate_argument: bool,
) -> RealifiedOperator {
    let m = mode_count(trunc);
    let mut matrix = DMatrix::zeros(2 * m, 2 * m);
    for i in 0..m {
        let k = freq_at(trunc, i);
        for j in 0..m {
            let p = freq_at(trunc, j);
            if conjugate_argument {
                // (ψ conj δ)_k = sum_p ψ_{k+p} conj(δ_p)
                let a = psi.get(FreqIndex::new(k.k1 + p.k1, k.k2 + p.k2));
                if a != ZERO {
                    set_block(&mut matrix, i, j, conj_block(a));
                }
            } else {
                let a = psi.get(FreqIndex::new(k.k1 - p.k1, k.k2 - p.k2));
                if a != ZERO {
                    set_block(&mut matrix, i, j, complex_block(a));
                }
            }
        }
    }
    RealifiedOperator { trunc, matrix }
}

// ---------------------------------------------------------------------------
// Serialization

/// JSON form `{ "N": n, "coeffs": [[re, im], ...] }`, row-major in `(k1, k2)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldJson {
    #[serde(rename = "N")]
    pub n: usize,
    pub coeffs: Vec<[f64; 2]>,
}

impl From<&SpectralField> for FieldJson {
    fn from(f: &SpectralField) -> Self {
        Self { n: f.trunc, coeffs: f.coeffs.iter().map(|c| [c.re, c.im]).collect() }
    }
}

impl TryFrom<FieldJson> for SpectralField {
    type Error = Error;

    fn try_from(j: FieldJson) -> Result<Self> {
        SpectralField::from_coeffs(j.n, j.coeffs.into_iter().map(|[a, b]| Complex64::new(a, b)).collect())
    }
}

impl Serialize for SpectralField {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        FieldJson::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for SpectralField {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = FieldJson::deserialize(d)?;
        SpectralField::try_from(j).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn field_strategy(trunc: usize) -> impl Strategy<Value = SpectralField> {
        proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), mode_count(trunc)).prop_map(move |v| {
            SpectralField::from_coeffs(trunc, v.into_iter().map(|(a, b)| c(a, b)).collect()).unwrap()
        })
    }

    /// Direct coefficient convolution, the oracle for the collocation route.
    fn convolve(f: &SpectralField, g: &SpectralField, out: usize) -> SpectralField {
        SpectralField::from_fn(out, |k| {
            f.modes()
                .map(|(p, a)| a * g.get(FreqIndex::new(k.k1 - p.k1, k.k2 - p.k2)))
                .sum()
        })
    }

    fn max_diff(a: &SpectralField, b: &SpectralField) -> f64 {
        a.coeffs().iter().zip(b.coeffs()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
    }

    #[test]
    fn layout_is_row_major_from_minus_n() {
        let f = SpectralField::zeros(2);
        assert_eq!(f.len(), 25);
        assert_eq!(f.freq(0), FreqIndex::new(-2, -2));
        assert_eq!(f.freq(1), FreqIndex::new(-2, -1));
        assert_eq!(f.freq(12), FreqIndex::ZERO);
        assert_eq!(f.index_of(FreqIndex::new(2, 2)), Some(24));
        assert_eq!(f.index_of(FreqIndex::new(3, 0)), None);
    }

    #[test]
    fn rejects_bad_construction() {
        assert!(matches!(
            SpectralField::from_coeffs(1, vec![c(0.0, 0.0); 8]),
            Err(Error::DimensionMismatch { .. })
        ));
        let mut v = vec![c(0.0, 0.0); 9];
        v[3] = c(f64::NAN, 0.0);
        assert_eq!(SpectralField::from_coeffs(1, v), Err(Error::NonFinite("field coefficients")));
        assert!(SpectralField::from_coeffs(0, vec![c(0.0, 0.0)]).is_err());
    }

    #[test]
    fn laplacian_power_examples() {
        let f = SpectralField::from_fn(3, |k| c(k.k1 as f64, k.k2 as f64 + 0.5));
        assert_eq!(laplacian_power(&f, 0.0), f);
        let k0 = SpectralField::constant(3, c(2.5, -1.0));
        assert_eq!(laplacian_power(&k0, 3.7), k0);
        let e = SpectralField::single_mode(3, FreqIndex::new(1, 0), c(1.0, 0.0));
        assert_eq!(laplacian_power(&e, 1.0).get(FreqIndex::new(1, 0)), c(2.0, 0.0));
    }

    #[test]
    fn del_examples() {
        let k0 = SpectralField::constant(2, c(3.0, 1.0));
        assert_eq!(del(&k0), SpectralField::zeros(2));
        assert_eq!(delbar(&k0), SpectralField::zeros(2));
        let e10 = SpectralField::single_mode(2, FreqIndex::new(1, 0), c(1.0, 0.0));
        assert_eq!(del(&e10).get(FreqIndex::new(1, 0)), c(0.0, 0.5));
        assert_eq!(delbar(&e10).get(FreqIndex::new(1, 0)), c(0.0, 0.5));
        let e01 = SpectralField::single_mode(2, FreqIndex::new(0, 1), c(1.0, 0.0));
        assert_eq!(del(&e01).get(FreqIndex::new(0, 1)), c(0.5, 0.0));
    }

    #[test]
    fn del_matches_point_derivative() {
        // ∂ e^{i(k1 x + k2 y)} = (i k1 - i (i k2)) / 2 = (i/2)(k1 - i k2)
        let f = SpectralField::from_fn(2, |k| c((k.k1 + 2 * k.k2) as f64 * 0.1, 0.3 - 0.05 * k.k1 as f64));
        let x = [0.4, -1.1];
        let h = 1e-5;
        let fx = (f.eval_at([x[0] + h, x[1]]) - f.eval_at([x[0] - h, x[1]])) / (2.0 * h);
        let fy = (f.eval_at([x[0], x[1] + h]) - f.eval_at([x[0], x[1] - h])) / (2.0 * h);
        let expect = (fx - c(0.0, 1.0) * fy) * 0.5;
        assert!((del(&f).eval_at(x) - expect).norm() < 1e-7);
    }

    #[test]
    fn conjugate_field_examples() {
        let e = SpectralField::single_mode(2, FreqIndex::new(1, 0), c(1.0, 0.0));
        let ce = conjugate_field(&e);
        assert_eq!(ce.get(FreqIndex::new(-1, 0)), c(1.0, 0.0));
        assert_eq!(ce.get(FreqIndex::new(1, 0)), c(0.0, 0.0));
        // real-valued field: Hermitian-symmetric coefficients
        let real = SpectralField::from_fn(2, |k| {
            let a = c((k.k1 * 3 + k.k2) as f64, (k.k2 - k.k1) as f64);
            let b = c((-k.k1 * 3 - k.k2) as f64, (-k.k2 + k.k1) as f64).conj();
            a + b
        });
        assert!(max_diff(&conjugate_field(&real), &real) == 0.0);
        let x = [0.3, 2.0];
        assert!((conjugate_field(&e).eval_at(x) - e.eval_at(x).conj()).norm() < 1e-14);
    }

    #[test]
    fn apply_polynomial_examples() {
        let f = SpectralField::from_fn(3, |k| c(0.1 * k.k1 as f64, 0.05 * (k.k2 * k.k1) as f64 - 0.2));
        let id = apply_polynomial(&f, &[c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert!(max_diff(&id, &f) < 1e-14);
        let cst = apply_polynomial(&f, &[c(1.5, -0.5)]).unwrap();
        assert_eq!(cst, SpectralField::constant(3, c(1.5, -0.5)));
        let a = c(0.7, -0.3);
        let e = SpectralField::single_mode(2, FreqIndex::new(1, 0), a);
        let sq = apply_polynomial(&e, &[c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        let oracle = convolve(&e, &e, 2);
        assert!((sq.get(FreqIndex::new(2, 0)) - a * a).norm() < 1e-14);
        assert!(max_diff(&sq, &oracle) < 1e-14);
        assert!(apply_polynomial(&f, &[c(f64::INFINITY, 0.0)]).is_err());
    }

    #[test]
    fn apply_polynomial_full_band_is_exact_expansion() {
        let f = SpectralField::from_fn(2, |k| c((k.k1 - k.k2) as f64 * 0.2, 0.1 * k.k1 as f64 + 0.3));
        let sq = apply_polynomial_to(&f, &[c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)], 4).unwrap();
        assert!(max_diff(&sq, &convolve(&f, &f, 4)) < 1e-13);
        let x = [0.7, -0.2];
        assert!((sq.eval_at(x) - f.eval_at(x) * f.eval_at(x)).norm() < 1e-12);
    }

    #[test]
    fn l2_inner_examples() {
        let e10 = SpectralField::single_mode(2, FreqIndex::new(1, 0), c(1.0, 0.0));
        let e01 = SpectralField::single_mode(2, FreqIndex::new(0, 1), c(1.0, 0.0));
        assert_eq!(l2_inner(&e10, &e01).unwrap(), c(0.0, 0.0));
        assert_eq!(l2_inner(&e10, &e10.scale(c(3.0, 0.0))).unwrap(), c(3.0, 0.0));
        assert!(l2_inner(&e10, &SpectralField::zeros(3)).is_err());
    }

    #[test]
    fn sobolev_norm_examples() {
        let f = SpectralField::from_fn(2, |k| c(k.k1 as f64, 1.0));
        assert!((sobolev_norm(&f, 0.0) - f.norm()).abs() < 1e-14);
        let k0 = SpectralField::constant(2, c(3.0, 4.0));
        assert!((sobolev_norm(&k0, -2.5) - 5.0).abs() < 1e-14);
        let e = SpectralField::single_mode(2, FreqIndex::new(1, 0), c(1.0, 0.0));
        assert!((sobolev_norm(&e, 1.0) - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn multiplication_operator_identity_and_conjugation() {
        let one = SpectralField::constant(2, c(1.0, 0.0));
        let op = multiplication_operator(&one, 2, false);
        assert_eq!(op, RealifiedOperator::identity(2));
        let cj = multiplication_operator(&one, 2, true);
        let sq = cj.compose(&cj).unwrap();
        assert_eq!(sq, RealifiedOperator::identity(2));
        let f = SpectralField::from_fn(2, |k| c(k.k1 as f64, 0.5 * k.k2 as f64 - 1.0));
        assert!(max_diff(&cj.apply(&f).unwrap(), &conjugate_field(&f)) < 1e-15);
    }

    #[test]
    fn multiplication_operator_matches_apply_and_project() {
        let psi = SpectralField::from_fn(3, |k| c(0.3 / (1.0 + k.norm_sq()), 0.1 * k.k1 as f64));
        let single = SpectralField::single_mode(2, FreqIndex::new(1, -1), c(0.5, 2.0));
        for (field, conj) in [(&psi, false), (&psi, true), (&single, false)] {
            let op = multiplication_operator(field, 2, conj);
            for j in 0..mode_count(2) {
                for unit in [c(1.0, 0.0), c(0.0, 1.0)] {
                    let mut basis = SpectralField::zeros(2);
                    basis.coeffs[j] = unit;
                    let arg = if conj { conjugate_field(&basis) } else { basis.clone() };
                    let expect = multiply(field, &arg, 2);
                    let got = op.apply(&basis).unwrap();
                    assert!(max_diff(&got, &expect) <= 1e-12);
                }
            }
        }
    }

    #[test]
    fn complex_part_recovers_complex_linear_maps() {
        let psi = SpectralField::from_fn(1, |k| c(k.k1 as f64, 1.0));
        let op = multiplication_operator(&psi, 1, false);
        let cm = op.complex_part(0.0).unwrap();
        let f = SpectralField::from_fn(1, |k| c(1.0, k.k2 as f64));
        let v = nalgebra::DVector::from_vec(f.coeffs().to_vec());
        let direct = op.apply(&f).unwrap();
        let via = cm * v;
        for (a, b) in direct.coeffs().iter().zip(via.iter()) {
            assert!((a - b).norm() < 1e-14);
        }
        assert!(multiplication_operator(&psi, 1, true).complex_part(1e-12).is_none());
    }

    #[test]
    fn json_roundtrip_and_order() {
        let f = SpectralField::from_fn(1, |k| c(k.k1 as f64, k.k2 as f64));
        let s = serde_json::to_string(&f).unwrap();
        assert!(s.starts_with("{\"N\":1,\"coeffs\":[[-1.0,-1.0],[-1.0,0.0]"));
        let back: SpectralField = serde_json::from_str(&s).unwrap();
        assert_eq!(back, f);
        assert!(serde_json::from_str::<SpectralField>("{\"N\":1,\"coeffs\":[[0,0]]}").is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn four_delbar_del_is_laplacian(f in field_strategy(3)) {
            let lhs = delbar(&del(&f)).scale(c(4.0, 0.0));
            let rhs = laplacian(&f);
            for (a, b) in lhs.coeffs().iter().zip(rhs.coeffs()) {
                prop_assert!((a - b).norm() <= 1e-12 * (1.0 + b.norm()));
            }
        }

        #[test]
        fn conjugation_is_involution_and_intertwines_del(f in field_strategy(2)) {
            prop_assert_eq!(conjugate_field(&conjugate_field(&f)), f.clone());
            prop_assert_eq!(del(&conjugate_field(&f)), conjugate_field(&delbar(&f)));
        }

        #[test]
        fn monomials_match_convolution(f in field_strategy(2), d in 2usize..5) {
            let mut mono = vec![c(0.0, 0.0); d + 1];
            mono[d] = c(1.0, 0.0);
            let got = apply_polynomial(&f, &mono).unwrap();
            let mut full = f.clone();
            for _ in 1..d {
                full = convolve(&full, &f, 2 * d);
            }
            let oracle = full.resized(2);
            let scale = oracle.norm().max(1e-300);
            prop_assert!(max_diff(&got, &oracle) / scale <= 1e-10);
        }

        #[test]
        fn real_roundtrip(f in field_strategy(2)) {
            prop_assert_eq!(SpectralField::from_real(2, &f.to_real()).unwrap(), f);
        }
    }
}
