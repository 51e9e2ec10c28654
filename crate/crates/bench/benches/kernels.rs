use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use wavezar_bench::{interval_generator, square_system};
use wavezar_core::gcc::{control_time, trace_ray};
use wavezar_core::stability::resolvent_norm;
use wavezar_core::{BoxRegion, DomainSpec};

fn leapfrog_step(c: &mut Criterion) {
    let mut group = c.benchmark_group("leapfrog_step");
    for n in [41, 101, 201] {
        let (system, init) = square_system(n);
        let dt = 0.5 * system.stability_limit();
        group.bench_with_input(BenchmarkId::from_parameter(n * n), &init, |b, s| {
            b.iter(|| system.step(black_box(s), dt).unwrap())
        });
    }
    group.finish();
}

fn resolvent_point(c: &mut Criterion) {
    let mut group = c.benchmark_group("resolvent_norm");
    group.sample_size(10);
    for n in [32, 64, 128] {
        let dense = interval_generator(n).to_dense_energy().unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &dense, |b, a| b.iter(|| resolvent_norm(a, black_box(7.3))));
    }
    group.finish();
}

fn rays(c: &mut Criterion) {
    let square = DomainSpec::unit_square();
    c.bench_function("trace_ray/t50", |b| {
        b.iter(|| trace_ray(&square, black_box([0.13, 0.71]), [0.6, 0.8], 50.0).unwrap())
    });
    let frame = wavezar_core::geometry::boundary_frame(&square, 0.1);
    c.bench_function("control_time/frame_32x64", |b| b.iter(|| control_time(&square, &frame, 32, 64, 50.0).unwrap()));
    let strip = [BoxRegion::rectangle((0.4, 0.6), (0.0, 1.0))];
    c.bench_function("control_time/strip_32x64", |b| b.iter(|| control_time(&square, &strip, 32, 64, 50.0).unwrap()));
}

criterion_group!(benches, leapfrog_step, resolvent_point, rays);
criterion_main!(benches);
