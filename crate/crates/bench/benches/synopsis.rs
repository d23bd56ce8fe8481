use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;
use wavecode::{best_basis_select, fptas, hybrid, rest_optimal, Inner, LpNorm};
use wavecode_bench::{noise, saw_prefix};

// the saw prefixes used for the running-time comparison
fn saw_prefixes(c: &mut Criterion) {
    let mut g = c.benchmark_group("saw");
    g.sample_size(10);
    for l in 9u32..=12 {
        let f = saw_prefix(1 << l);
        g.bench_with_input(BenchmarkId::new("rest", f.len()), &f, |b, f| {
            b.iter(|| rest_optimal(black_box(f), 16, LpNorm::INF, None).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("unrest", f.len()), &f, |b, f| {
            b.iter(|| fptas(black_box(f), 16, LpNorm::INF, 1.0, None).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("hybrid", f.len()), &f, |b, f| {
            b.iter(|| hybrid(black_box(f), 16, LpNorm::INF, 1.0, None).unwrap())
        });
    }
    g.finish();
}

fn eps_sweep(c: &mut Criterion) {
    let mut g = c.benchmark_group("fptas_eps");
    g.sample_size(10);
    // the l1 grid grows with n, so keep the input small
    let f = noise(32, 4);
    for eps in [0.25, 0.5, 1.0] {
        g.bench_with_input(BenchmarkId::from_parameter(eps), &eps, |b, &eps| {
            b.iter(|| fptas(black_box(&f), 4, LpNorm::ONE, eps, None).unwrap())
        });
    }
    g.finish();
}

fn best_basis(c: &mut Criterion) {
    let f = noise(1024, 5);
    c.bench_function("best_basis/1024/greedy", |b| {
        b.iter(|| best_basis_select(black_box(&f), 32, LpNorm::INF, Inner::Greedy, 8).unwrap())
    });
}

criterion_group!(benches, saw_prefixes, eps_sweep, best_basis);
criterion_main!(benches);
