//! Benchmarks for the hot paths: the closed-form solver across market
//! sizes, the grid certificate, best-response dynamics, and the entry
//! bisection. Instances come from the seeded generator so runs compare
//! like with like.

use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use hashpeg::{
    best_response_dynamics, new_miner_optimum, solve_equilibrium, verify_equilibrium,
    HashrateProfile, UpdateOrder, VerifyOptions,
};
use hashpeg_bench::random_market;

fn bench_solve(c: &mut Criterion) {
    let mut group = c.benchmark_group("solve_equilibrium");
    for m in [10usize, 100, 1000] {
        let (costs, params) = random_market(m, 11);
        group.throughput(Throughput::Elements(m as u64));
        group.bench_with_input(BenchmarkId::from_parameter(m), &m, |b, _| {
            b.iter(|| solve_equilibrium(black_box(&costs), black_box(&params)).unwrap())
        });
    }
    group.finish();
}

fn bench_verify(c: &mut Criterion) {
    // the certificate is grid-dominated: ~1000 utility evaluations per miner
    let (costs, params) = random_market(10, 17);
    let equilibrium = solve_equilibrium(&costs, &params).unwrap();
    let options = VerifyOptions::default();
    c.bench_function("verify_equilibrium/m10_grid1000", |b| {
        b.iter(|| {
            verify_equilibrium(black_box(&equilibrium), &costs, &params, &options).unwrap()
        })
    });
}

fn bench_dynamics(c: &mut Criterion) {
    // zero tolerance keeps the update count fixed at the full budget
    let (costs, params) = random_market(8, 23);
    let start = HashrateProfile::new(vec![0.01; 8]).unwrap();
    c.bench_function("best_response_dynamics/m8_200updates", |b| {
        b.iter(|| {
            best_response_dynamics(
                black_box(&start),
                &costs,
                &params,
                UpdateOrder::RoundRobin,
                200,
                0.0,
            )
            .unwrap()
        })
    });
}

fn bench_entry(c: &mut Criterion) {
    // fractional decay exponent forces the bisection path
    c.bench_function("new_miner_optimum/bisection", |b| {
        b.iter(|| new_miner_optimum(black_box(0.3), black_box(1.5)).unwrap())
    });
}

criterion_group!(benches, bench_solve, bench_verify, bench_dynamics, bench_entry);
criterion_main!(benches);
