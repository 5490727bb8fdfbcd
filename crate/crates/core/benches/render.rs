use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};

use modflow::config::JobConfig;
use modflow::elliptic::{invariants_of, wp, TruncationSpec};
use modflow::render::{render_animation, render_frame, Execution, RenderJob};
use modflow::{solve_periodic_orbit, UnimodularMatrix};

fn job(overrides: &[&str]) -> RenderJob {
    let mut cfg = JobConfig::default();
    for o in overrides {
        cfg.apply_override(o).unwrap();
    }
    cfg.to_job().unwrap()
}

fn executions() -> Vec<(&'static str, Execution)> {
    let cores = std::thread::available_parallelism().map_or(1, |n| n.get());
    vec![("sequential", Execution::Sequential), ("parallel", Execution::Parallel { threads: cores })]
}

fn frame(c: &mut Criterion) {
    let j = job(&["resolution=128x128", "supersample=2"]);
    let lattice = j.orbit.lattice().flow(0.3);
    let mut group = c.benchmark_group("frame-128x128-ss2");
    group.throughput(Throughput::Elements(128 * 128));
    group.sample_size(10);
    for (name, exec) in executions() {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| render_frame(&j.expr, &lattice, &j.viewport, &j.palette, &j.scheme, exec).unwrap())
        });
    }
    group.finish();
}

fn animation(c: &mut Criterion) {
    let j = job(&["resolution=64x64", "frames=16", "expression=(P^2+1)/(P-3) + P'*(1/P)"]);
    let mut group = c.benchmark_group("animation-16x64x64");
    group.throughput(Throughput::Elements(16));
    group.sample_size(10);
    for (name, exec) in executions() {
        group.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| render_animation(&j, exec).unwrap()));
    }
    group.finish();
}

fn kernels(c: &mut Criterion) {
    let b = UnimodularMatrix { a: 5, b: 2, c: 12, d: 5 };
    c.bench_function("solve-periodic-orbit", |bench| bench.iter(|| solve_periodic_orbit(black_box(b)).unwrap()));
    let lattice = solve_periodic_orbit(b).unwrap().lattice().flow(1.1);
    let spec = TruncationSpec::default();
    c.bench_function("invariants", |bench| bench.iter(|| invariants_of(black_box(&lattice), &spec).unwrap()));
    let inv = invariants_of(&lattice, &spec).unwrap();
    let z = num_complex::Complex64::new(0.31, 0.17);
    c.bench_function("wp", |bench| bench.iter(|| wp(black_box(z), &inv).unwrap()));
}

criterion_group!(benches, frame, animation, kernels);
criterion_main!(benches);
