use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use ordstat::populations::order_stat_joint_with;
use ordstat::{
    build_basis, default_quartic_params, maximal_correlation, minimize_quartic, search_same_g,
    JointMethod, JointOptions, Population, SearchOptions,
};
use ordstat_bench::uniform_joint;

fn basis(c: &mut Criterion) {
    let mut g = c.benchmark_group("hahn_basis");
    for n in [20usize, 100, 200] {
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| b.iter(|| build_basis(black_box(n))));
    }
    g.finish();
}

fn joint(c: &mut Criterion) {
    let pop = Population::uniform_grid(8).unwrap();
    let mut g = c.benchmark_group("joint_8_points_2_4_of_5");
    for method in [JointMethod::Enumerate, JointMethod::Formula] {
        let opts = JointOptions { method, ..Default::default() };
        g.bench_function(format!("{method:?}"), |b| b.iter(|| order_stat_joint_with(&pop, 2, 4, 5, &opts)));
    }
    g.finish();
}

fn maxcorr(c: &mut Criterion) {
    let joint = uniform_joint(50, 1, 2, 2);
    c.bench_function("maxcorr_N50", |b| b.iter(|| maximal_correlation(black_box(&joint))));
}

fn quartic(c: &mut Criterion) {
    let p = default_quartic_params(12).unwrap();
    c.bench_function("quartic_default_N12", |b| b.iter(|| minimize_quartic(black_box(&p))));
}

fn search(c: &mut Criterion) {
    let pop = Population::uniform_grid(6).unwrap();
    let opts = SearchOptions::default();
    c.bench_function("search_1_3_3_N6", |b| b.iter(|| search_same_g(&pop, 1, 3, 3, &opts)));
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(20);
    targets = basis, joint, maxcorr, quartic, search
}
criterion_main!(benches);
