//! Single-thread versus default rayon pool on the two parallel hot spots.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use eit_ats::fitter::{fit, FitConfig};
use eit_ats::lineshape::{absorption_profile, default_grid, uniform_grid, TlaParams};
use eit_ats::models::ModelKind;
use eit_ats::simulation::{sweep_omega, NoiseSpec};

fn pools() -> Vec<(&'static str, rayon::ThreadPool)> {
    let build = |n| rayon::ThreadPoolBuilder::new().num_threads(n).build().unwrap();
    vec![("sequential", build(1)), ("parallel", build(0))]
}

fn bench_sweep(c: &mut Criterion) {
    let omegas = uniform_grid(0.6, 1.1, 0.1).unwrap();
    let grid = default_grid();
    let noise = NoiseSpec { sigma: 0.05, seed: 1, n_replicates: 4 };
    let cfg = FitConfig { n_starts: 4, ..FitConfig::default() };
    let mut group = c.benchmark_group("sweep_omega");
    group.sample_size(10);
    for (name, pool) in pools() {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| pool.install(|| sweep_omega(1.0, 0.1, &noise, &omegas, &grid, &cfg).unwrap()))
        });
    }
    group.finish();
}

fn bench_multistart(c: &mut Criterion) {
    let data = absorption_profile(&TlaParams::resonant(1.2, 1.0, 0.1), &default_grid()).unwrap();
    let cfg = FitConfig::default();
    let mut group = c.benchmark_group("multistart_fit_ats");
    group.sample_size(10);
    for (name, pool) in pools() {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| pool.install(|| fit(ModelKind::Ats, &data, &cfg).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, bench_sweep, bench_multistart);
criterion_main!(benches);
