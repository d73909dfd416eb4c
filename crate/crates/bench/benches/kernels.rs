use criterion::{criterion_group, criterion_main, Criterion};
use floquet_bench::{model1, model2};
use floquet_core::floquet::{floquet_generator_exact, lindbladian_fourier, magnus_generator, steady_state_block};
use floquet_core::linalg::{expm, logm_principal};
use floquet_core::monodromy;
use std::hint::black_box;

fn dense_kernels(c: &mut Criterion) {
    let l = model1(2.0);
    let g = l.at(0.3);
    let v = monodromy(&l, 0.0).unwrap().map;
    c.bench_function("expm 4x4", |b| b.iter(|| expm(black_box(g.data()))));
    c.bench_function("logm 4x4", |b| b.iter(|| logm_principal(black_box(v.data())).unwrap()));
}

fn propagation(c: &mut Criterion) {
    let l1 = model1(2.0);
    let l2 = model2();
    c.bench_function("monodromy model1", |b| b.iter(|| monodromy(black_box(&l1), 0.0).unwrap()));
    c.bench_function("monodromy model2", |b| b.iter(|| monodromy(black_box(&l2), 0.0).unwrap()));
}

fn generators(c: &mut Criterion) {
    let l = model1(6.0);
    c.bench_function("exact-log generator", |b| {
        b.iter(|| floquet_generator_exact(black_box(&l), 0.0).unwrap())
    });
    c.bench_function("magnus order 2", |b| b.iter(|| magnus_generator(black_box(&l), 2, 16).unwrap()));
}

fn steady_state(c: &mut Criterion) {
    let l = model1(2.0);
    let series = lindbladian_fourier(&l, 2, 64).unwrap();
    c.bench_function("steady state M=10", |b| b.iter(|| steady_state_block(black_box(&series), 10).unwrap()));
}

criterion_group!(benches, dense_kernels, propagation, generators, steady_state);
criterion_main!(benches);
