use pullback_core::gaussian::*;
use pullback_core::mc;
use pullback_core::spectral::{laplace_symbol, multiply, sobolev_norm, SpectralField};
use pullback_core::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn random_h2(rng: &mut ChaCha8Rng, trunc: usize) -> SpectralField {
    SpectralField::from_fn(trunc, |k| {
        let a: f64 = rng.sample(StandardNormal);
        let b: f64 = rng.sample(StandardNormal);
        Complex64::new(a, b) * laplace_symbol(k).powf(-1.6)
    })
}

#[test]
fn sobolev_product_ratio_is_uniform_in_truncation() {
    let max_ratio = |trunc: usize| {
        let mut rng = mc::stream(1, 400, trunc as u64, 0);
        (0..1000)
            .map(|_| {
                let f = random_h2(&mut rng, trunc);
                let g = random_h2(&mut rng, trunc);
                let fg = multiply(&f, &g, 2 * trunc);
                sobolev_norm(&fg, 1.5) / (sobolev_norm(&f, 2.0) * sobolev_norm(&g, 2.0))
            })
            .fold(0.0, f64::max)
    };
    let (r4, r8, r16) = (max_ratio(4), max_ratio(8), max_ratio(16));
    assert!(r16 <= 2.0 * r4, "{r4} {r8} {r16}");
    assert!(r8 <= 2.0 * r4, "{r4} {r8} {r16}");
}

fn test_field(rng: &mut ChaCha8Rng, trunc: usize, norm: f64) -> SpectralField {
    let f = SpectralField::from_fn(trunc, |_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)));
    f.scale(Complex64::new(norm / f.norm(), 0.0))
}

#[test]
fn characteristic_functional_matches_closed_form() {
    for t in [1.0, 2.0, 5.0] {
        let spec = GaussianSpec::white_noise(8, t).unwrap();
        let mut rng = mc::stream(2, 401, 0, t as u64);
        let phis: Vec<_> = (0..20).map(|i| test_field(&mut rng, 8, t * (0.3 + 0.1 * i as f64))).collect();
        let est = characteristic_functional_mc_batch(&spec, &phis, 20_000, 3).unwrap();
        let hits = phis
            .iter()
            .zip(&est)
            .filter(|(phi, e)| {
                let exact = (-phi.norm().powi(2) / (2.0 * t * t)).exp();
                assert!((exact - characteristic_functional_exact(&spec, phi)).abs() < 1e-14);
                e.agrees_with(Complex64::new(exact, 0.0), 3.0, 0.0)
            })
            .count();
        assert!(hits >= 18, "t = {t}: {hits}/20");
    }
}

#[test]
fn cameron_martin_reweighting() {
    let spec = GaussianSpec::new(4, 2.0, 0.5, 1).unwrap();
    let mut rng = mc::stream(4, 402, 0, 0);
    let mut hits = 0;
    for i in 0..10 {
        let v = test_field(&mut rng, 4, 0.05).map_modes(|k, c| c * laplace_symbol(k).powf(-1.0));
        let phi = test_field(&mut rng, 4, 1.0);
        let (lhs, rhs) = cameron_martin_check(&spec, &v, &phi, 20_000, 10 + i).unwrap();
        let band = 3.0 * (lhs.stderr.powi(2) + rhs.stderr.powi(2)).sqrt();
        if (lhs.mean - rhs.mean).norm() <= band {
            hits += 1;
        }
    }
    assert!(hits >= 9, "{hits}/10");
}
