use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use siqs_core::mc::{run_ensemble, EnsembleConfig};
use siqs_core::presets;
use siqs_core::sde::{generate_noise, simulate_path};
use siqs_core::{ThresholdReport, TimeGrid};

fn bench_path(c: &mut Criterion) {
    let s = presets::example1();
    let grid = TimeGrid::new(1e-3, 10.0).unwrap();
    c.bench_function("generate_noise 10k steps", |b| b.iter(|| generate_noise(&s.levy, grid, black_box(7))));
    let record = generate_noise(&s.levy, grid, 7);
    c.bench_function("simulate_path 10k steps", |b| {
        b.iter(|| simulate_path(&s.params, &s.noise, &s.levy, s.initial, black_box(&record)).unwrap())
    });
}

fn bench_thresholds(c: &mut Criterion) {
    let s = presets::example1();
    c.bench_function("threshold report n_max=3", |b| {
        b.iter(|| ThresholdReport::compute(black_box(&s.params), &s.noise, &s.levy, 3))
    });
}

fn bench_ensemble(c: &mut Criterion) {
    let s = presets::example1();
    let mut cfg = EnsembleConfig::new(16, 1, 1e-2, 50.0, s.initial);
    cfg.extinction = true;
    let mut group = c.benchmark_group("ensemble");
    group.sample_size(10);
    group.bench_function("16 paths x 5k steps", |b| {
        b.iter(|| run_ensemble(&s.params, &s.noise, &s.levy, black_box(&cfg)).unwrap())
    });
    group.finish();
}

criterion_group!(benches, bench_path, bench_thresholds, bench_ensemble);
criterion_main!(benches);
