use nalgebra::DMatrix;
use pullback_core::detkit::{schatten_norm, OperatorMatrix};
use pullback_core::mc;
use pullback_core::spectral::{FreqIndex, SpectralField};
use pullback_core::wzlg::*;
use pullback_core::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn cubic(trunc: usize, t: f64) -> WzlgModel {
    WzlgModel::new(vec![ZERO, c(-1.0, 0.0), ZERO, c(1.0 / 3.0, 0.0)], 2.0, t, trunc, None).unwrap()
}

fn quadratic(trunc: usize) -> WzlgModel {
    WzlgModel::new(vec![ZERO, ZERO, c(0.5, 0.0)], 1.0, 1.0, trunc, Some(ZERO)).unwrap()
}

fn smooth_field(rng: &mut ChaCha8Rng, trunc: usize, amp: f64) -> SpectralField {
    SpectralField::from_fn(trunc, |k| {
        let a: f64 = rng.sample(StandardNormal);
        let b: f64 = rng.sample(StandardNormal);
        c(a, b) * amp * (1.0 + k.norm_sq()).powi(-2)
    })
}

/// Fixed smooth field near the base: only modes with `|k|_inf <= 1`.
fn fixed_bump(model: &WzlgModel) -> SpectralField {
    SpectralField::from_fn(model.trunc(), |k| {
        if k.k1.abs().max(k.k2.abs()) > 1 {
            ZERO
        } else if k == FreqIndex::ZERO {
            model.base()
        } else {
            c(0.15 * k.k1 as f64, 0.1 * k.k2 as f64)
        }
    })
}

#[test]
fn frechet_derivative_matches_finite_differences() {
    let m = cubic(4, 1.0);
    let mut rng = mc::stream(1, 500, 0, 0);
    for _ in 0..5 {
        let phi = smooth_field(&mut rng, 4, 0.5).add(&m.base_field()).unwrap();
        let delta = smooth_field(&mut rng, 4, 1.0);
        let h = 1e-6;
        let plus = apply_f(&m, &phi.add(&delta.scale(c(h, 0.0))).unwrap()).unwrap();
        let minus = apply_f(&m, &phi.sub(&delta.scale(c(h, 0.0))).unwrap()).unwrap();
        let fd = plus.sub(&minus).unwrap().scale(c(0.5 / h, 0.0));
        let exact = derivative_operator(&m, &phi, Variant::Frechet).unwrap().apply(&delta).unwrap();
        let rel = fd.sub(&exact).unwrap().norm() / exact.norm();
        assert!(rel <= 1e-5, "relative {rel:e}");
    }
}

#[test]
fn quadratic_derivative_is_uniformly_invertible() {
    // ∂ + conj couples only k and -k, so the realified matrix splits into
    // 4x4 blocks on (Re c_k, Im c_k, Re c_-k, Im c_-k)
    for trunc in [2usize, 4, 8, 12, 16] {
        let q = quadratic(trunc);
        let d = derivative_operator(&q, &SpectralField::zeros(trunc), Variant::Frechet).unwrap();
        let mat = d.matrix();
        let probe = SpectralField::zeros(trunc);
        let mut smin = f64::INFINITY;
        let mut seen = vec![false; probe.len()];
        for i in 0..probe.len() {
            if seen[i] {
                continue;
            }
            let j = probe.index_of(probe.freq(i).neg()).unwrap();
            seen[i] = true;
            seen[j] = true;
            let idx: Vec<usize> = if i == j { vec![2 * i, 2 * i + 1] } else { vec![2 * i, 2 * i + 1, 2 * j, 2 * j + 1] };
            let block = DMatrix::from_fn(idx.len(), idx.len(), |a, b| mat[(idx[a], idx[b])]);
            smin = smin.min(block.singular_values().min());
            for &r in &idx {
                for col in 0..mat.ncols() {
                    if !idx.contains(&col) {
                        assert_eq!(mat[(r, col)], 0.0);
                    }
                }
            }
        }
        assert!(smin >= 0.5, "N = {trunc}: {smin}");
    }
}

#[test]
fn psi_routes_agree_and_are_signs() {
    let m = cubic(4, 1.0);
    let base = BaseOperator::new(&m, Variant::Frechet).unwrap();
    let mut rng = mc::stream(2, 500, 0, 0);
    for _ in 0..6 {
        let phi = smooth_field(&mut rng, 4, 0.3).add(&m.base_field()).unwrap();
        let a = base.psi_phase(&m, &phi, DetRoute::Eigen).unwrap();
        let b = base.psi_phase(&m, &phi, DetRoute::TraceFormula).unwrap();
        assert!((a - b).norm() <= 1e-8);
        assert!((a * a - c(1.0, 0.0)).norm() <= 1e-12);
    }
}

#[test]
fn k_operator_schatten_three_norm_settles() {
    let norms: Vec<f64> = [4usize, 8, 12]
        .iter()
        .map(|&n| {
            let m = cubic(n, 1.0);
            let base = BaseOperator::new(&m, Variant::Frechet).unwrap();
            let k = base.k_matrix(&m, &fixed_bump(&m)).unwrap();
            schatten_norm(&k, 3).unwrap()
        })
        .collect();
    assert!(norms.iter().all(|x| x.is_finite() && *x > 0.0));
    assert!(norms[2] / norms[1] - 1.0 <= 0.10, "{norms:?}");
}

#[test]
fn k_operator_vanishes_exactly_at_the_base() {
    for variant in [Variant::Frechet, Variant::Literal] {
        let m = cubic(3, 1.0);
        let base = BaseOperator::new(&m, variant).unwrap();
        match base.k_matrix(&m, &m.base_field()).unwrap() {
            OperatorMatrix::Real(k) => assert!(k.iter().all(|&x| x == 0.0)),
            OperatorMatrix::Complex(k) => assert!(k.iter().all(|&x| x == ZERO)),
        }
    }
}

#[test]
fn zero_noise_branches_include_both_constants() {
    let m = cubic(3, 1.0);
    let base = BaseOperator::new(&m, Variant::Frechet).unwrap();
    let opts = SamplerOptions { n_starts: 4, ..Default::default() };
    let d = pullback_sample(&m, &base, &SpectralField::zeros(3), opts, 1, 0).unwrap();
    for r in [-1.0, 1.0] {
        let k = SpectralField::constant(3, c(r, 0.0));
        assert!(d.branches.iter().any(|b| b.field.sub(&k).unwrap().norm() < 1e-9), "missing {r}");
    }
    // both constants have Ψ = +1 relative to the base -1
    let consts: Vec<_> = d.branches.iter().filter(|b| b.distance_to_constants < 1e-9).collect();
    assert_eq!(consts.len(), 2);
    assert!(consts.iter().all(|b| b.phase == Some(c(1.0, 0.0))));
}

#[test]
fn quadratic_experiment_is_exact() {
    let q = quadratic(3);
    let opts = SamplerOptions { n_starts: 4, ..Default::default() };
    let e = run_experiment(&q, 12, 3, opts).unwrap();
    assert_eq!(e.mass.mean, c(1.0, 0.0));
    assert_eq!(e.mass.stderr, 0.0);
    assert_eq!(e.phase_integral.mean, c(1.0, 0.0));
    assert_eq!(e.newton_failures, 0);
    let one = run_experiment(&q, 1, 3, opts).unwrap();
    assert_eq!(one.mass.mean, c(1.0, 0.0));
}

#[test]
fn branch_distance_against_scale() {
    let opts = SamplerOptions { n_starts: 4, ..Default::default() };
    let dist: Vec<f64> = [1.0, 4.0, 16.0]
        .iter()
        .map(|&t| run_experiment(&cubic(3, t), 6, 5, opts).unwrap().mean_distance_to_constants)
        .collect();
    println!("mean branch distance to constants at t = 1, 4, 16: {dist:?}");
    assert!(dist.iter().all(|d| d.is_finite()));
}
