use criterion::{criterion_group, criterion_main, BatchSize, BenchmarkId, Criterion};

use bootperc::experiments::run_sweep;
use bootperc::graphgen::{sample_chung_lu, sample_gnp};
use bootperc::percolation::{brute_force_bootstrap, run_bootstrap, select_seeds, SeedSpec};
use bootperc::{build_weights, AValue, Model, RngStream, SeedTemplate, SweepConfig};

fn engine(c: &mut Criterion) {
    let n = 100_000;
    let ws = build_weights(n, 2.5, 2.0 / 3.0, 1.0).unwrap();
    let g = sample_chung_lu(&ws, &mut RngStream::new(1, 0));
    let mut group = c.benchmark_group("bootstrap");
    for a in [5usize, 928] {
        group.bench_with_input(BenchmarkId::new("chung_lu_100k", a), &a, |b, &a| {
            let mut k = 0;
            b.iter_batched(
                || {
                    k += 1;
                    select_seeds(&SeedSpec::Uniform { a }, n, None, &mut RngStream::new(2, k))
                        .unwrap()
                },
                |seeds| run_bootstrap(&g, &seeds, 2).unwrap(),
                BatchSize::SmallInput,
            )
        });
    }
    let er = sample_gnp(100_000, 2e-4, &mut RngStream::new(4, 0)).unwrap();
    let seeds = select_seeds(
        &SeedSpec::Uniform { a: 250 },
        100_000,
        None,
        &mut RngStream::new(4, 1),
    )
    .unwrap();
    group.bench_function("gnp_100k_full", |b| {
        b.iter(|| run_bootstrap(&er, &seeds, 2).unwrap())
    });
    group.finish();
}

fn oracle(c: &mut Criterion) {
    let g = sample_gnp(200, 0.03, &mut RngStream::new(6, 0)).unwrap();
    let seeds: Vec<usize> = (0..10).collect();
    let mut group = c.benchmark_group("engine_vs_oracle_200");
    group.bench_function("worklist", |b| {
        b.iter(|| run_bootstrap(&g, &seeds, 2).unwrap())
    });
    group.bench_function("rescan", |b| {
        b.iter(|| brute_force_bootstrap(&g, &seeds, 2).unwrap())
    });
    group.finish();
}

fn sweep(c: &mut Criterion) {
    let cfg = SweepConfig {
        model: Model::ChungLu {
            beta: 2.5,
            zeta: 2.0 / 3.0,
            x0: 1.0,
        },
        r: 2,
        seed_strategy: SeedTemplate::Uniform,
        a_values: vec![AValue::TimesCritical(0.1), AValue::TimesCritical(20.0)],
        n_values: vec![20_000],
        replicas: 16,
        master_seed: 0,
        output_path: None,
        kernel_c: None,
        fixed_graph: false,
    };
    let mut group = c.benchmark_group("sweep");
    group.sample_size(10);
    group.bench_function("20k_x16", |b| b.iter(|| run_sweep(&cfg, None).unwrap()));
    group.finish();
}

criterion_group!(benches, engine, oracle, sweep);
criterion_main!(benches);
