use std::hint::black_box;
use std::sync::Arc;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use eigennet_core::consensus::{run_consensus, AcConfig, AcEngine};
use eigennet_core::dec_eig::{default_dla_start, default_dpm_start, dla_run, dpm_run};
use eigennet_core::eigencore::{dense_hermitian_eig, lanczos, sample_covariance, tridiagonal_eigenvalues};
use eigennet_core::signal_model::{gen_h1, SignalConfig};
use eigennet_core::topology::generate_random_geometric;
use eigennet_core::CMatrix;

const K: usize = 40;
const N: usize = 10;

fn setup(engine: AcEngine, iterations: usize) -> AcConfig {
    let g = generate_random_geometric(K, 0.45, 1).expect("connected graph");
    AcConfig::new(engine, Arc::new(g), iterations).expect("valid consensus config")
}

fn consensus(c: &mut Criterion) {
    let z0 = CMatrix::from_fn(K, N, |i, j| default_dpm_start(1, (i * N + j) as u64)[0]);
    let mut group = c.benchmark_group("consensus");
    for engine in [AcEngine::Standard, AcEngine::Chebyshev] {
        let cfg = setup(engine, 30);
        group.bench_function(BenchmarkId::new(engine.name(), 30), |b| {
            b.iter(|| run_consensus(black_box(&z0), &cfg).unwrap())
        });
    }
    group.finish();
}

fn decentralized(c: &mut Criterion) {
    let sig = SignalConfig::new(K, N, 1.0, vec![7.0], 3).unwrap();
    let (y, _) = gen_h1(&sig).unwrap();
    let cfg = setup(AcEngine::Chebyshev, 30);
    let v0 = default_dpm_start(K, 5);
    let v1 = default_dla_start(K);
    let mut group = c.benchmark_group("decentralized");
    group.sample_size(20);
    group.bench_function("dpm_m10_i30", |b| {
        b.iter(|| dpm_run(&y, &mut cfg.build().unwrap(), 10, &v0).unwrap())
    });
    group.bench_function("dla_m10_i30", |b| {
        b.iter(|| dla_run(&y, &mut cfg.build().unwrap(), 10, &v1).unwrap())
    });
    group.finish();
}

fn centralized(c: &mut Criterion) {
    let sig = SignalConfig::new(K, N, 1.0, vec![7.0], 3).unwrap();
    let (y, _) = gen_h1(&sig).unwrap();
    let r = sample_covariance(&y);
    let v1 = default_dla_start(K);
    c.bench_function("jacobi_k40", |b| b.iter(|| dense_hermitian_eig(black_box(r.matrix())).unwrap()));
    let t = lanczos(&r, &v1, 20).unwrap().t;
    c.bench_function("lanczos_m20", |b| b.iter(|| lanczos(black_box(&r), &v1, 20).unwrap()));
    c.bench_function("bisection_m20", |b| b.iter(|| tridiagonal_eigenvalues(black_box(&t))));
}

criterion_group!(benches, consensus, decentralized, centralized);
criterion_main!(benches);
