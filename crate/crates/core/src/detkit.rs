//! Schatten norms, Fredholm determinants and the regularized determinants
//! `det_k(1 + K) = det(1 + R_k(K))` with
//! `R_k(K) = (1 + K) exp(sum_{n<k} (-K)^n / n) - 1`.
//!
//! The primary route for `det_k` is the spectrum of `K`:
//! `det_k(1 + K) = prod_i (1 + λ_i) exp(sum_{n<k} (-λ_i)^n / n)`.
//! The `R_k` route and the closed trace formula are kept as cross-checks.

use nalgebra::{linalg::Schur, DMatrix};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::RealifiedOperator;

const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Dense square operator, real or complex.
#[derive(Debug, Clone, PartialEq)]
pub enum OperatorMatrix {
    Real(DMatrix<f64>),
    Complex(DMatrix<Complex64>),
}

impl OperatorMatrix {
    pub fn real(m: DMatrix<f64>) -> Result<Self> {
        check_square(m.nrows(), m.ncols())?;
        if !m.iter().all(|x| x.is_finite()) {
            return Err(Error::NonFinite("operator entries"));
        }
        Ok(Self::Real(m))
    }

    pub fn complex(m: DMatrix<Complex64>) -> Result<Self> {
        check_square(m.nrows(), m.ncols())?;
        if !m.iter().all(|x| x.re.is_finite() && x.im.is_finite()) {
            return Err(Error::NonFinite("operator entries"));
        }
        Ok(Self::Complex(m))
    }

    pub fn zeros_real(n: usize) -> Self {
        Self::Real(DMatrix::zeros(n, n))
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Real(m) => m.nrows(),
            Self::Complex(m) => m.nrows(),
        }
    }

    pub fn is_real(&self) -> bool {
        matches!(self, Self::Real(_))
    }

    pub fn to_complex(&self) -> DMatrix<Complex64> {
        match self {
            Self::Real(m) => m.map(|x| Complex64::new(x, 0.0)),
            Self::Complex(m) => m.clone(),
        }
    }

    fn trace_of_powers(&self, count: usize) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(count);
        match self {
            Self::Real(m) => {
                let mut p = m.clone();
                for j in 0..count {
                    if j > 0 {
                        p = &p * m;
                    }
                    out.push(Complex64::new(p.trace(), 0.0));
                }
            }
            Self::Complex(m) => {
                let mut p = m.clone();
                for j in 0..count {
                    if j > 0 {
                        p = &p * m;
                    }
                    out.push(p.trace());
                }
            }
        }
        out
    }

    fn det_one_plus(&self) -> Complex64 {
        match self {
            Self::Real(m) => {
                let n = m.nrows();
                Complex64::new((DMatrix::identity(n, n) + m).lu().determinant(), 0.0)
            }
            Self::Complex(m) => {
                let n = m.nrows();
                (DMatrix::identity(n, n) + m).lu().determinant()
            }
        }
    }
}

impl From<RealifiedOperator> for OperatorMatrix {
    fn from(op: RealifiedOperator) -> Self {
        Self::Real(op.into_matrix())
    }
}

fn check_square(r: usize, c: usize) -> Result<()> {
    if r != c {
        return Err(Error::DimensionMismatch { expected: r, got: c });
    }
    Ok(())
}

fn check_k(k: usize) -> Result<()> {
    if k < 1 {
        return Err(Error::OutOfRange("Schatten / regularization index must be >= 1".into()));
    }
    Ok(())
}

fn is_diagonal<T: PartialEq + Copy + Default>(m: &DMatrix<T>) -> bool {
    let zero = T::default();
    m.iter().enumerate().all(|(idx, &x)| {
        let (i, j) = (idx % m.nrows(), idx / m.nrows());
        i == j || x == zero
    })
}

/// Singular values, unordered.
pub fn singular_values(op: &OperatorMatrix) -> Result<Vec<f64>> {
    let n = op.dim();
    let max_iter = 200 * n.max(10);
    match op {
        Self_::Real(m) if is_diagonal(m) => Ok(m.diagonal().iter().map(|x| x.abs()).collect()),
        Self_::Complex(m) if is_diagonal(m) => Ok(m.diagonal().iter().map(|x| x.norm()).collect()),
        Self_::Real(m) => m
            .clone()
            .try_svd(false, false, f64::EPSILON, max_iter)
            .map(|s| s.singular_values.iter().copied().collect())
            .ok_or(Error::SvdFailure),
        Self_::Complex(m) => m
            .clone()
            .try_svd(false, false, f64::EPSILON, max_iter)
            .map(|s| s.singular_values.iter().copied().collect())
            .ok_or(Error::SvdFailure),
    }
}

use OperatorMatrix as Self_;

/// `sum_i σ_i^k`: the unrooted quantity `tr (K* K)^{k/2}`.
pub fn schatten_sum(op: &OperatorMatrix, k: usize) -> Result<f64> {
    check_k(k)?;
    Ok(singular_values(op)?.iter().map(|s| s.powi(k as i32)).sum())
}

/// `(sum_i σ_i^k)^{1/k}`.
pub fn schatten_norm(op: &OperatorMatrix, k: usize) -> Result<f64> {
    Ok(schatten_sum(op, k)?.powf(1.0 / k as f64))
}

pub fn eigenvalues(op: &OperatorMatrix) -> Result<Vec<Complex64>> {
    let n = op.dim();
    if n == 0 {
        return Ok(Vec::new());
    }
    let max_iter = 100 * n.max(10);
    match op {
        Self_::Real(m) => Schur::try_new(m.clone(), f64::EPSILON, max_iter)
            .map(|s| s.complex_eigenvalues().iter().copied().collect())
            .ok_or(Error::EigenFailure),
        Self_::Complex(m) => Schur::try_new(m.clone(), f64::EPSILON, max_iter)
            .and_then(|s| s.eigenvalues())
            .map(|v| v.iter().copied().collect())
            .ok_or(Error::EigenFailure),
    }
}

fn snap(op: &OperatorMatrix, z: Complex64) -> Complex64 {
    if op.is_real() {
        Complex64::new(z.re, 0.0)
    } else {
        z
    }
}

/// `det(1 + K) = prod_i (1 + λ_i)`.
pub fn fredholm_det(op: &OperatorMatrix) -> Result<Complex64> {
    let prod = eigenvalues(op)?.iter().fold(ONE, |acc, &l| acc * (ONE + l));
    Ok(snap(op, prod))
}

/// `det(1 + K) = sum_n tr Λ^n K`, with the exterior-power traces obtained
/// from the power sums `tr K^j` through Newton's identities.
pub fn fredholm_det_series(op: &OperatorMatrix) -> Complex64 {
    let n = op.dim();
    let p = op.trace_of_powers(n);
    let mut e = vec![ONE];
    for m in 1..=n {
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 1..=m {
            let term = e[m - j] * p[j - 1];
            if j % 2 == 1 {
                acc += term;
            } else {
                acc -= term;
            }
        }
        e.push(acc / m as f64);
    }
    snap(op, e.iter().sum())
}

/// `R_k(K) = (1 + K) exp(sum_{n=1}^{k-1} (-K)^n / n) - 1`.
pub fn r_k(op: &OperatorMatrix, k: usize) -> Result<OperatorMatrix> {
    check_k(k)?;
    if k == 1 {
        return Ok(op.clone());
    }
    fn build<T: nalgebra::ComplexField + Copy>(m: &DMatrix<T>, k: usize) -> DMatrix<T> {
        let n = m.nrows();
        let id = DMatrix::<T>::identity(n, n);
        let neg = -m.clone();
        let mut sum = DMatrix::<T>::zeros(n, n);
        let mut pow = id.clone();
        for j in 1..k {
            pow = &pow * &neg;
            sum += &pow * T::from_real(nalgebra::convert::<f64, T::RealField>(1.0 / j as f64));
        }
        (&id + m) * sum.exp() - id
    }
    Ok(match op {
        Self_::Real(m) => Self_::Real(build(m, k)),
        Self_::Complex(m) => Self_::Complex(build(m, k)),
    })
}

/// `ln |det_k(1 + K)|` and `arg det_k(1 + K)` from the spectrum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogDet {
    pub log_modulus: f64,
    pub arg: f64,
    real_input: bool,
}

impl LogDet {
    pub fn value(&self) -> Complex64 {
        let z = Complex64::from_polar(self.log_modulus.exp(), self.arg);
        if self.real_input {
            Complex64::new(z.re, 0.0)
        } else {
            z
        }
    }

    /// Unit phase; `NearZeroDeterminant` if `|det| <= tol`. For real input
    /// the result is exactly `+1` or `-1`.
    pub fn phase(&self, tol: f64) -> Result<Complex64> {
        if self.log_modulus <= tol.ln() {
            return Err(Error::NearZeroDeterminant { modulus: self.log_modulus.exp(), tol });
        }
        let u = Complex64::from_polar(1.0, self.arg);
        if self.real_input {
            Ok(Complex64::new(u.re.signum(), 0.0))
        } else {
            Ok(u)
        }
    }
}

/// Log-domain spectral evaluation of `det_k(1 + K)`; safe for large
/// dimensions where the product over- or underflows.
pub fn log_det_k(op: &OperatorMatrix, k: usize) -> Result<LogDet> {
    check_k(k)?;
    let mut log = Complex64::new(0.0, 0.0);
    for l in eigenvalues(op)? {
        let one_plus = ONE + l;
        if one_plus.norm() == 0.0 {
            return Ok(LogDet { log_modulus: f64::NEG_INFINITY, arg: 0.0, real_input: op.is_real() });
        }
        log += one_plus.ln();
        let mut pow = ONE;
        for n in 1..k {
            pow *= -l;
            log += pow / n as f64;
        }
    }
    Ok(LogDet { log_modulus: log.re, arg: log.im, real_input: op.is_real() })
}

/// `det_k(1 + K)` from the spectrum of `K`.
pub fn det_k(op: &OperatorMatrix, k: usize) -> Result<Complex64> {
    Ok(log_det_k(op, k)?.value())
}

/// `det(1 + R_k(K))` by LU.
pub fn det_k_via_rk(op: &OperatorMatrix, k: usize) -> Result<Complex64> {
    Ok(r_k(op, k)?.det_one_plus())
}

/// `det(1 + K) exp(sum_{n=1}^{k-1} (-1)^n tr K^n / n)`, with `det(1 + K)`
/// by LU. Exact for every finite matrix.
pub fn det_k_trace_formula(op: &OperatorMatrix, k: usize) -> Result<Complex64> {
    check_k(k)?;
    let traces = op.trace_of_powers(k.saturating_sub(1));
    let exponent: Complex64 = traces
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let n = (i + 1) as f64;
            if (i + 1) % 2 == 1 {
                -t / n
            } else {
                t / n
            }
        })
        .sum();
    Ok(snap(op, op.det_one_plus() * exponent.exp()))
}

/// Default phase tolerance `1e-10 * dim`.
pub fn default_phase_tol(dim: usize) -> f64 {
    1e-10 * dim.max(1) as f64
}

/// `z / |z|`, or `NearZeroDeterminant` when `|z| <= tol`.
pub fn phase(z: Complex64, tol: f64) -> Result<Complex64> {
    let m = z.norm();
    if m <= tol {
        return Err(Error::NearZeroDeterminant { modulus: m, tol });
    }
    Ok(z / m)
}
