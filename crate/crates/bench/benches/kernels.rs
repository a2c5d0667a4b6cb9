use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use twistfock::conjugate::conjugate_series;
use twistfock::matchings::{enumerate_matchings, IncompleteMatching};
use twistfock::wick::wick_polynomial;
use twistfock_bench::{matrix_algebra, probe, q_flip};

fn kernels(c: &mut Criterion) {
    let mut g = c.benchmark_group("kernel");
    for n in [4usize, 6, 8] {
        let m = q_flip(2, 0.4);
        let v = probe(1 << n);
        g.bench_function(format!("apply_r/d2/n{n}"), |b| b.iter(|| m.fock.apply_r(n, black_box(&v))));
    }
    g.bench_function("dense_p/d2/n8", |b| {
        b.iter_batched(|| q_flip(2, 0.4), |m| m.fock.kernels(8).map(|_| ()), BatchSize::LargeInput)
    });
    g.bench_function("solve/d2/n7", |b| {
        let m = q_flip(2, 0.4);
        let v = probe(1 << 7).into();
        m.fock.solve(7, &v).unwrap();
        b.iter(|| m.fock.solve(7, black_box(&v)))
    });
    g.finish();
}

fn contractions(c: &mut Criterion) {
    let mut g = c.benchmark_group("contraction");
    let m = matrix_algebra(0.2);
    let pi = IncompleteMatching::new(6, &[(1, 4), (2, 6)]).unwrap();
    let v = probe(4usize.pow(6));
    m.contractions.w_apply(&pi, &v).unwrap();
    g.bench_function("w_apply/d4/n6", |b| b.iter(|| m.contractions.w_apply(&pi, black_box(&v))));
    g.bench_function("enumerate/n8", |b| b.iter(|| enumerate_matchings(black_box(8), 10)));
    g.finish();
}

fn series(c: &mut Criterion) {
    let mut g = c.benchmark_group("series");
    g.sample_size(10);
    let m = q_flip(2, 0.3);
    let xi = probe(1 << 6);
    g.bench_function("wick/d2/n6", |b| b.iter(|| wick_polynomial(&m, black_box(&xi), 6)));
    let f = probe(2);
    conjugate_series(&m, &f, 3).unwrap();
    g.bench_function("conjugate/d2/M3", |b| b.iter(|| conjugate_series(&m, black_box(&f), 3)));
    g.finish();
}

criterion_group!(benches, kernels, contractions, series);
criterion_main!(benches);
