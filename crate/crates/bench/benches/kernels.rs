use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use pullback_bench::{cubic_model, field_near_base, random_matrix};
use pullback_core::detkit::{det_k, det_k_trace_formula, OperatorMatrix};
use pullback_core::wick::enumerate_cycles_chain;
use pullback_core::wzlg::apply_f;

fn bench_apply_f(c: &mut Criterion) {
    let mut g = c.benchmark_group("apply_f");
    for trunc in [4usize, 8, 16] {
        let model = cubic_model(trunc);
        let phi = field_near_base(&model, 1);
        g.bench_with_input(BenchmarkId::from_parameter(trunc), &trunc, |b, _| {
            b.iter(|| apply_f(&model, black_box(&phi)).unwrap())
        });
    }
    g.finish();
}

fn bench_det_k(c: &mut Criterion) {
    let mut g = c.benchmark_group("det_3");
    for n in [16usize, 64, 256] {
        let op = OperatorMatrix::Real(random_matrix(n, 2));
        g.bench_with_input(BenchmarkId::new("eigen", n), &n, |b, _| b.iter(|| det_k(black_box(&op), 3).unwrap()));
        g.bench_with_input(BenchmarkId::new("trace_formula", n), &n, |b, _| {
            b.iter(|| det_k_trace_formula(black_box(&op), 3).unwrap())
        });
    }
    g.finish();
}

fn bench_partitions(c: &mut Criterion) {
    let mut g = c.benchmark_group("enumerate_cycles_chain");
    for n in [3usize, 5, 7] {
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| {
            b.iter(|| enumerate_cycles_chain(black_box(n), 2).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, bench_apply_f, bench_det_k, bench_partitions);
criterion_main!(benches);
