use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use ssrcps_bench::labeled_sample;
use ssrcps_core::bounds::{
    binomial_cdf, clopper_pearson_ucb, clt_ucb, hoeffding_ucb, wsr_ucb, wsr_ucb_scaled,
    BinomialCount, ErrorLevel,
};

fn clopper_pearson(c: &mut Criterion) {
    let delta = ErrorLevel::new(0.1).unwrap();
    let mut group = c.benchmark_group("clopper_pearson");
    for n in [130_u64, 5000, 100_000] {
        let count = BinomialCount::new(n, n / 7).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &count, |b, &count| {
            b.iter(|| clopper_pearson_ucb(black_box(count), delta).unwrap())
        });
    }
    group.finish();
    let count = BinomialCount::new(5000, 700).unwrap();
    c.bench_function("binomial_cdf/5000", |b| {
        b.iter(|| binomial_cdf(black_box(count), 0.15).unwrap())
    });
}

fn betting(c: &mut Criterion) {
    let delta = ErrorLevel::new(0.1).unwrap();
    let mut group = c.benchmark_group("wsr");
    for n in [130, 4000] {
        let sample = labeled_sample(n);
        group.bench_with_input(BenchmarkId::new("generalized", n), &sample, |b, s| {
            b.iter(|| wsr_ucb(black_box(s), delta).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("scaled", n), &sample, |b, s| {
            b.iter(|| wsr_ucb_scaled(black_box(s), delta).unwrap())
        });
    }
    group.finish();
}

fn closed_forms(c: &mut Criterion) {
    let delta = ErrorLevel::new(0.1).unwrap();
    let sample = labeled_sample(4000);
    c.bench_function("hoeffding/4000", |b| {
        b.iter(|| hoeffding_ucb(black_box(&sample), delta).unwrap())
    });
    c.bench_function("clt/4000", |b| {
        b.iter(|| clt_ucb(black_box(&sample), delta).unwrap())
    });
}

criterion_group!(benches, clopper_pearson, betting, closed_forms);
criterion_main!(benches);
