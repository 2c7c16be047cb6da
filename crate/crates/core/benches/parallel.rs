//! Parallel (rayon) against sequential execution of the hot loops.
//!
//! Without the `parallel` feature both variants run sequentially.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use sphere_quad::exec;
use sphere_quad::geometry::random_points;
use sphere_quad::operators::{fourier_coeffs, sigma_eval, EvalPath, OperatorSpec};
use sphere_quad::quadrature::{lsq_weights, weighted_gram, GramOperator, SolverOptions};
use sphere_quad::Filter;

fn schedules<R>(c: &mut Criterion, name: &str, param: usize, f: impl Fn() -> R) {
    let mut g = c.benchmark_group(name);
    g.sample_size(10);
    g.bench_with_input(BenchmarkId::new("parallel", param), &param, |b, _| {
        b.iter(|| black_box(f()))
    });
    g.bench_with_input(BenchmarkId::new("sequential", param), &param, |b, _| {
        b.iter(|| exec::sequential(|| black_box(f())))
    });
    g.finish();
}

fn gram_matvec(c: &mut Criterion) {
    let set = random_points(1, 8192).unwrap();
    let n = 40;
    let op = GramOperator::new(set.points(), set.measure(), n)
        .unwrap()
        .without_cache();
    let r: Vec<f64> = (0..op.dim()).map(|i| (i as f64).sin()).collect();
    schedules(c, "gram_matvec", n, || op.apply(&r));
}

fn dense_gram(c: &mut Criterion) {
    let set = random_points(2, 8192).unwrap();
    schedules(c, "weighted_gram", 20, || {
        weighted_gram(set.points(), set.measure(), 20)
    });
}

fn operator_paths(c: &mut Criterion) {
    let set = random_points(3, 4096).unwrap();
    let rule = lsq_weights(&set, 24, &SolverOptions::default()).unwrap().rule;
    let z: Vec<f64> = rule.nodes().iter().map(|p| p.x() * p.y() + p.z().abs()).collect();
    let x = random_points(4, 500).unwrap().into_parts().0;
    schedules(c, "fourier_coeffs", 12, || fourier_coeffs(&rule, &z, 12).unwrap());
    let spec = OperatorSpec::new(rule.clone(), Filter::new(5).unwrap(), 12).unwrap();
    schedules(c, "sigma_kernel_sum", 12, || {
        sigma_eval(&spec, &z, &x, EvalPath::KernelSum).unwrap()
    });
}

criterion_group!(benches, gram_matvec, dense_gram, operator_paths);
criterion_main!(benches);
