use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use std::hint::black_box;
use wavecode::image2d::{transform2d, Image};
use wavecode::{cascade_forward, cascade_inverse, greedy_select, FilterBank, LpNorm, Scaling};
use wavecode_bench::noise;

fn cascade(c: &mut Criterion) {
    let mut g = c.benchmark_group("cascade");
    for fb in [FilterBank::haar(), FilterBank::db4()] {
        for l in [10u32, 14, 18] {
            let n = 1usize << l;
            let f = noise(n, 1);
            g.throughput(Throughput::Elements(n as u64));
            g.bench_with_input(BenchmarkId::new(format!("forward/{}", fb.name()), n), &f, |b, f| {
                b.iter(|| cascade_forward(black_box(f), &fb, Scaling::Orthonormal).unwrap())
            });
            let coef = cascade_forward(&f, &fb, Scaling::Orthonormal).unwrap();
            g.bench_with_input(BenchmarkId::new(format!("inverse/{}", fb.name()), n), &coef, |b, c| {
                b.iter(|| cascade_inverse(black_box(c), &fb).unwrap())
            });
        }
    }
    g.finish();
}

fn streaming_greedy(c: &mut Criterion) {
    let mut g = c.benchmark_group("greedy");
    for l in [12u32, 16] {
        let n = 1usize << l;
        let f = noise(n, 2);
        g.throughput(Throughput::Elements(n as u64));
        for p in [LpNorm::TWO, LpNorm::INF] {
            g.bench_with_input(BenchmarkId::new(format!("p={p}"), n), &f, |b, f| {
                b.iter(|| greedy_select(black_box(f), 64, p, &FilterBank::db2()).unwrap())
            });
        }
    }
    g.finish();
}

fn image(c: &mut Criterion) {
    let img = Image::test_card(256, 256).unwrap();
    c.bench_function("transform2d/256x256/haar", |b| {
        b.iter(|| transform2d(black_box(&img), &FilterBank::haar()).unwrap())
    });
}

criterion_group!(benches, cascade, streaming_greedy, image);
criterion_main!(benches);
