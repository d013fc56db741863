use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use gauged_reduce::scenarios::SCENARIO_NAMES;
use gauged_reduce_bench::Fixture;

fn brackets(c: &mut Criterion) {
    let mut group = c.benchmark_group("bracket");
    for name in SCENARIO_NAMES {
        let fx = Fixture::new(name);
        let sp = &fx.scenario.manifold;
        group.bench_function(format!("reduced/{name}"), |b| {
            b.iter(|| sp.reduced_bracket(&fx.f, &fx.g, black_box(&fx.point)).unwrap())
        });
        group.bench_function(format!("oracle/{name}"), |b| {
            b.iter(|| sp.oracle_bracket(&fx.f, &fx.g, black_box(&fx.point)).unwrap())
        });
    }
    group.finish();
}

fn fields(c: &mut Criterion) {
    let mut group = c.benchmark_group("hamiltonian_field");
    for name in SCENARIO_NAMES {
        let fx = Fixture::new(name);
        let sp = &fx.scenario.manifold;
        group.bench_function(name, |b| {
            b.iter(|| sp.hamiltonian_field(&fx.hamiltonian, black_box(&fx.point)).unwrap())
        });
    }
    group.finish();
}

fn flow(c: &mut Criterion) {
    let fx = Fixture::new("hopf");
    let s = &fx.scenario;
    c.bench_function("flow/hopf_100_steps", |b| {
        b.iter(|| s.manifold.integrate_flow(&fx.hamiltonian, black_box(&s.designated_point), 0.1, 1e-3).unwrap())
    });
}

fn leaves(c: &mut Criterion) {
    let fx = Fixture::new("so5_pairs");
    let s = &fx.scenario;
    let lambda = s.reference_lambda.clone().unwrap();
    c.bench_function("leaf_report/so5_pairs", |b| {
        b.iter(|| s.manifold.leaf_report(black_box(&lambda), &s.designated_point.x).unwrap())
    });
}

criterion_group!(benches, brackets, fields, flow, leaves);
criterion_main!(benches);
