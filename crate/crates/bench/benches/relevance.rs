use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use ghostvar_bench::fixture;
use ghostvar_core::linalg::{sym_eigen, RngState};
use ghostvar_core::relevance::{fit_ghosts, relevance_ghost, relevance_permutation};
use ghostvar_core::relmatrix::{build_a, relevance_matrix, Replacement};
use ghostvar_core::{PermutationPlan, Scenario};
use std::hint::black_box;

fn ghosts(c: &mut Criterion) {
    let mut g = c.benchmark_group("fit_ghosts");
    for scenario in [Scenario::Ex1, Scenario::Ex3] {
        let f = fixture(scenario, 7);
        g.bench_with_input(BenchmarkId::from_parameter(scenario), &f, |b, f| {
            b.iter(|| fit_ghosts(black_box(&f.split.test.x)).unwrap())
        });
    }
    g.finish();
}

fn relevances(c: &mut Criterion) {
    let f = fixture(Scenario::Ex3, 7);
    let (n, p) = f.split.test.x.shape();
    let gh = fit_ghosts(&f.split.test.x).unwrap();
    let plan = PermutationPlan::independent(n, p, &mut RngState::stream(7, 3));
    c.bench_function("relevance_ghost/ex3", |b| {
        b.iter(|| relevance_ghost(&f.model, &f.split.test, black_box(&gh)).unwrap())
    });
    c.bench_function("relevance_permutation/ex3", |b| {
        b.iter(|| relevance_permutation(&f.model, &f.split.test, black_box(&plan)).unwrap())
    });
    c.bench_function("build_a/ex3", |b| {
        b.iter(|| build_a(&f.model, &f.split.test, Replacement::Ghost(black_box(&gh))).unwrap())
    });
}

fn eigen(c: &mut Criterion) {
    let f = fixture(Scenario::Ex3, 7);
    let gh = fit_ghosts(&f.split.test.x).unwrap();
    let rm = relevance_matrix(&build_a(&f.model, &f.split.test, Replacement::Ghost(&gh)).unwrap()).unwrap();
    let mut g = c.benchmark_group("sym_eigen");
    g.sample_size(10);
    g.bench_function("v_200", |b| b.iter(|| sym_eigen(black_box(&rm.v)).unwrap()));
    g.finish();
}

criterion_group!(benches, ghosts, relevances, eigen);
criterion_main!(benches);
