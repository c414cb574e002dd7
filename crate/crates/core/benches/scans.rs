use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use dicke_core::classical::bifurcation_scan;
use dicke_core::entanglement::{entropy_scan, reduced_atomic_dm, ScanOptions};
use dicke_core::spectra::{converge_at, TRUNCATION_CAP};
use dicke_core::wigner::{evaluate_wigner_plane, multipole_decompose, GridSpec};
use dicke_core::{CouplingMode, Exec, ModelParams};

const POLICIES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn lambdas(n: usize, end: f64) -> Vec<f64> {
    (0..n).map(|i| end * i as f64 / (n - 1) as f64).collect()
}

fn entropy(c: &mut Criterion) {
    let mut group = c.benchmark_group("entropy_scan");
    group.sample_size(10);
    let grid = lambdas(201, 2.0);
    for j in [4.5, 7.5] {
        let template = ModelParams::resonant(0.0, 0.0, j).unwrap();
        for (name, exec) in POLICIES {
            let opts = ScanOptions { n_max: Some(40), exec, ..ScanOptions::default() };
            group.bench_with_input(BenchmarkId::new(name, j), &opts, |b, opts| {
                b.iter(|| entropy_scan(&template, black_box(&grid), CouplingMode::Integrable, opts).unwrap())
            });
        }
    }
    group.finish();
}

fn wigner(c: &mut Criterion) {
    let mut group = c.benchmark_group("wigner_grid");
    group.sample_size(10);
    let p = ModelParams::resonant(1.5, 0.0, 4.5).unwrap();
    let gs = converge_at(&p, 1e-10, TRUNCATION_CAP).unwrap();
    let decomp = multipole_decompose(&reduced_atomic_dm(&gs.state, &gs.basis).unwrap());
    for points in [128, 256] {
        let spec = GridSpec { points, ..GridSpec::default() };
        for (name, exec) in POLICIES {
            group.bench_with_input(BenchmarkId::new(name, points), &spec, |b, &spec| {
                b.iter(|| evaluate_wigner_plane(black_box(&decomp), spec, exec).unwrap())
            });
        }
    }
    group.finish();
}

fn bifurcation(c: &mut Criterion) {
    let mut group = c.benchmark_group("bifurcation_scan");
    let template = ModelParams::resonant(0.0, 0.0, 4.5).unwrap();
    let grid = lambdas(2001, 2.0);
    for (name, exec) in POLICIES {
        group.bench_function(name, |b| {
            b.iter(|| bifurcation_scan(&template, black_box(&grid), CouplingMode::Symmetric, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, entropy, wigner, bifurcation);
criterion_main!(benches);
