//! Dense univariate polynomials with complex coefficients, lowest degree first.

use nalgebra::{linalg::Schur, DMatrix};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub fn check_finite(coeffs: &[Complex64]) -> Result<()> {
    if coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite("polynomial coefficients"))
    }
}

/// Drops trailing zero coefficients (keeps at least one).
pub fn trimmed(coeffs: &[Complex64]) -> Vec<Complex64> {
    let mut v = coeffs.to_vec();
    while v.len() > 1 && *v.last().unwrap() == Complex64::new(0.0, 0.0) {
        v.pop();
    }
    if v.is_empty() {
        v.push(Complex64::new(0.0, 0.0));
    }
    v
}

pub fn degree(coeffs: &[Complex64]) -> usize {
    trimmed(coeffs).len() - 1
}

pub fn eval(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    coeffs
        .iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
}

pub fn derivative(coeffs: &[Complex64]) -> Vec<Complex64> {
    if coeffs.len() <= 1 {
        return vec![Complex64::new(0.0, 0.0)];
    }
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, &c)| c * i as f64)
        .collect()
}

pub fn from_real(coeffs: &[f64]) -> Vec<Complex64> {
    coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect()
}

/// All complex roots, from the companion matrix spectrum polished by Newton.
pub fn roots(coeffs: &[Complex64]) -> Result<Vec<Complex64>> {
    check_finite(coeffs)?;
    let p = trimmed(coeffs);
    let d = p.len() - 1;
    if d == 0 {
        return Ok(Vec::new());
    }
    let lead = p[d];
    let companion = DMatrix::<Complex64>::from_fn(d, d, |i, j| {
        if i == 0 {
            -p[d - 1 - j] / lead
        } else if i == j + 1 {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let schur = Schur::try_new(companion, 1e-15, 10_000).ok_or(Error::EigenFailure)?;
    let eig = schur.eigenvalues().ok_or(Error::EigenFailure)?;
    let dp = derivative(&p);
    Ok(eig
        .iter()
        .map(|&z0| {
            let mut z = z0;
            for _ in 0..8 {
                let d = eval(&dp, z);
                if d.norm() == 0.0 {
                    break;
                }
                let step = eval(&p, z) / d;
                z -= step;
                if step.norm() <= 1e-16 * (1.0 + z.norm()) {
                    break;
                }
            }
            z
        })
        .collect())
}
