use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use ruin_core::limits::{invert_cf_sequential, special_phi_hat, uniform_grid};
use ruin_core::ring::rat;
use ruin_core::sim::simulate_batch_sequential;
use ruin_core::ModelParams;
use std::hint::black_box;

fn simulation(c: &mut Criterion) {
    let mut group = c.benchmark_group("simulate_batch");
    group.sample_size(10);
    for n in [20u32, 60] {
        let p = ModelParams::new(rat(1, 4), rat(3, 4), n / 4, n).unwrap();
        group.bench_with_input(BenchmarkId::new("sequential", n), &p, |bch, p| {
            bch.iter(|| simulate_batch_sequential(black_box(p), 7, 2_000).unwrap())
        });
        #[cfg(feature = "parallel")]
        group.bench_with_input(BenchmarkId::new("parallel", n), &p, |bch, p| {
            bch.iter(|| ruin_core::sim::simulate_batch_parallel(black_box(p), 7, 2_000).unwrap())
        });
    }
    group.finish();
}

fn inversion(c: &mut Criterion) {
    let mut group = c.benchmark_group("invert_cf");
    group.sample_size(10);
    let cf = |t: f64| special_phi_hat(t, 0.25);
    for points in [201usize, 801] {
        let xs = uniform_grid(-8.0, 8.0, points);
        group.bench_with_input(BenchmarkId::new("sequential", points), &xs, |bch, xs| {
            bch.iter(|| invert_cf_sequential(cf, black_box(xs), 30.0, 1e-3).unwrap())
        });
        #[cfg(feature = "parallel")]
        group.bench_with_input(BenchmarkId::new("parallel", points), &xs, |bch, xs| {
            bch.iter(|| ruin_core::limits::invert_cf_parallel(cf, black_box(xs), 30.0, 1e-3).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, simulation, inversion);
criterion_main!(benches);
