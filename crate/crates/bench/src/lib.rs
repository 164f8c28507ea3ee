//! Fixed inputs shared by the benchmarks.

use nalgebra::DMatrix;
use pullback_core::mc;
use pullback_core::spectral::SpectralField;
use pullback_core::wzlg::WzlgModel;
use pullback_core::Complex64;
use rand::Rng;

/// `P = φ^3 / 3 - φ` at `s = 2`, `t = 16`.
pub fn cubic_model(trunc: usize) -> WzlgModel {
    let z = Complex64::new(0.0, 0.0);
    WzlgModel::new(vec![z, Complex64::new(-1.0, 0.0), z, Complex64::new(1.0 / 3.0, 0.0)], 2.0, 16.0, trunc, None)
        .expect("valid model")
}

/// Base point plus a decaying random perturbation.
pub fn field_near_base(model: &WzlgModel, seed: u64) -> SpectralField {
    let mut rng = mc::stream(seed, 900, model.trunc() as u64, 0);
    let pert = SpectralField::from_fn(model.trunc(), |k| {
        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)) * 0.2 / (1.0 + k.norm_sq())
    });
    pert.add(&model.base_field()).expect("same truncation")
}

/// Random real matrix with spectral scale about 1.
pub fn random_matrix(n: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = mc::stream(seed, 901, n as u64, 0);
    DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0) / (n as f64).sqrt())
}
