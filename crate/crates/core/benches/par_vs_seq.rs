//! Compares the rayon global pool against a single-thread pool on the
//! data-parallel kernels. Build with `--no-default-features` to time the
//! plain-iterator fallback instead.

use std::collections::BTreeMap;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use freelab::fock::{build_standard, lambda_act, Label};
use freelab::freeness::check_free_independence;
use freelab::linalg::{random_matrix, random_vector, CMatrix};
use freelab::spectral::{free_product_spectrum, SpectrumModel};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::ThreadPool;

fn pools() -> Vec<(&'static str, ThreadPool)> {
    let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let all = rayon::ThreadPoolBuilder::new().build().unwrap();
    vec![("1-thread", single), ("all-threads", all)]
}

fn lambda(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let fock = build_standard(&[4, 4, 4], 5).unwrap();
    let t = random_matrix(&mut rng, 4, 4);
    let v = random_vector(&mut rng, fock.total_dim());
    let mut group = c.benchmark_group("lambda_act");
    for (name, pool) in pools() {
        group.bench_function(BenchmarkId::new(name, fock.total_dim()), |b| {
            b.iter(|| pool.install(|| lambda_act(&fock, 1, &t, &v).unwrap()))
        });
    }
    group.finish();
}

fn spectrum(c: &mut Criterion) {
    let seeds: BTreeMap<Label, SpectrumModel> = (1..=4).map(|l| (l, SpectrumModel::geometric(l, 60))).collect();
    let mut group = c.benchmark_group("free_product_spectrum");
    for (name, pool) in pools() {
        group.bench_function(name, |b| b.iter(|| pool.install(|| free_product_spectrum(&seeds, 12, 60.0).unwrap())));
    }
    group.finish();
}

fn freeness(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let fock = build_standard(&[3, 3, 4], 4).unwrap();
    let families: BTreeMap<Label, Vec<CMatrix>> =
        fock.seeds().iter().map(|s| (s.label(), vec![random_matrix(&mut rng, s.dim(), s.dim())])).collect();
    let mut group = c.benchmark_group("check_free_independence");
    group.sample_size(20);
    for (name, pool) in pools() {
        group.bench_function(name, |b| {
            b.iter(|| pool.install(|| check_free_independence(&fock, &families, 256, 1e-10, 7).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, lambda, spectrum, freeness);
criterion_main!(benches);
