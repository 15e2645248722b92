use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use netgame::analysis::rho_infinity;
use netgame::game::equilibrium;
use netgame::graph::NamedGraph;
use netgame::intervene::optimal_intervention;
use netgame::{ActivitySet, WelfareMatrix};
use netgame_bench::{baseline, cycle_game, problem};

fn spectra(c: &mut Criterion) {
    let mut group = c.benchmark_group("spectral_decompose");
    for n in [10, 50, 100] {
        let net = NamedGraph::Cycle(n).build().unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &net, |b, net| {
            b.iter(|| black_box(net).spectral_decompose())
        });
    }
    group.finish();
}

fn equilibria(c: &mut Criterion) {
    let mut group = c.benchmark_group("equilibrium");
    for n in [10, 50] {
        let params = cycle_game(n, 4);
        let a = baseline(4, n);
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| equilibrium(black_box(&params), black_box(&a)).unwrap())
        });
    }
    group.finish();
}

fn interventions(c: &mut Criterion) {
    let mut group = c.benchmark_group("optimal_intervention");
    for n in [10, 50] {
        let prob = problem(n, 4, 2, 100.0);
        group.bench_with_input(BenchmarkId::from_parameter(n), &prob, |b, prob| {
            b.iter(|| optimal_intervention(black_box(prob)).unwrap())
        });
    }
    group.finish();
}

fn welfare_spectra(c: &mut Criterion) {
    let params = cycle_game(30, 4);
    let wm = WelfareMatrix::build(&params).unwrap();
    let r = wm.restrict(&ActivitySet::prefix(4, 3).unwrap()).unwrap();
    c.bench_function("structured_eigen/30x3", |b| {
        b.iter(|| black_box(&r).structured_eigen())
    });
    c.bench_function("dense_eigen/30x3", |b| {
        b.iter(|| nalgebra::SymmetricEigen::new(black_box(r.dense_ll())))
    });
    c.bench_function("rho_infinity/30x4", |b| {
        b.iter(|| rho_infinity(black_box(&params), 1).unwrap())
    });
}

criterion_group!(benches, spectra, equilibria, interventions, welfare_spectra);
criterion_main!(benches);
