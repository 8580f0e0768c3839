use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use ruc_core::instances::random_irreducible;
use ruc_core::linalg::{perron, Side};
use ruc_core::solver::solve_many;

fn perron_by_size(c: &mut Criterion) {
    let mut group = c.benchmark_group("perron");
    for n in [4usize, 16, 64, 256] {
        let m = random_irreducible(&mut ChaCha8Rng::seed_from_u64(n as u64), n, 5.0);
        group.bench_with_input(BenchmarkId::from_parameter(n), &m, |b, m| {
            b.iter(|| black_box(perron(m, Side::Right, 1e-10).unwrap()))
        });
    }
    group.finish();
}

fn batch_solve(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let games: Vec<_> = (0..256)
        .map(|_| {
            let a = random_irreducible(&mut rng, 24, 5.0);
            (a.clone(), a)
        })
        .collect();
    let mut group = c.benchmark_group("solve_many");
    group.sample_size(10);
    group.bench_function("parallel", |b| b.iter(|| black_box(solve_many(&games, 1e-10, true))));
    group.bench_function("sequential", |b| b.iter(|| black_box(solve_many(&games, 1e-10, false))));
    group.finish();
}

criterion_group!(benches, perron_by_size, batch_solve);
criterion_main!(benches);
