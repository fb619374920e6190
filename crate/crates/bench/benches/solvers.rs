use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use subgauss_core::generators::{lattice, lattice_center, sierpinski_gasket};
use subgauss_core::heat_kernel::HeatKernelEvolution;
use subgauss_core::potential::{annulus_capacity, exit_ball, exit_time};

fn capacity(c: &mut Criterion) {
    let mut group = c.benchmark_group("annulus_capacity");
    let z2 = lattice(2, 257).unwrap();
    let x = lattice_center(2, 257);
    for r in [8u64, 32] {
        group.bench_with_input(BenchmarkId::new("z2", r), &r, |b, &r| {
            b.iter(|| annulus_capacity(&z2, x, black_box(r)).unwrap())
        });
    }
    let gasket = sierpinski_gasket(7).unwrap();
    group.bench_function("gasket/32", |b| b.iter(|| annulus_capacity(&gasket, 0, black_box(32)).unwrap()));
    group.finish();
}

fn exit_times(c: &mut Criterion) {
    let mut group = c.benchmark_group("exit_time");
    let z2 = lattice(2, 257).unwrap();
    let x = lattice_center(2, 257);
    for r in [16u64, 64] {
        let ball = exit_ball(&z2, x, r).unwrap();
        group.bench_with_input(BenchmarkId::new("z2", r), &ball, |b, ball| {
            b.iter(|| exit_time(&z2, black_box(ball)).unwrap())
        });
    }
    let gasket = sierpinski_gasket(7).unwrap();
    let ball = exit_ball(&gasket, 0, 64).unwrap();
    group.bench_function("gasket/64", |b| b.iter(|| exit_time(&gasket, black_box(&ball)).unwrap()));
    group.finish();
}

fn heat_kernel(c: &mut Criterion) {
    let mut group = c.benchmark_group("heat_kernel");
    let z2 = lattice(2, 257).unwrap();
    let x = lattice_center(2, 257);
    group.bench_function("z2/1024 steps", |b| {
        b.iter(|| {
            let mut evo = HeatKernelEvolution::new(&z2, x).unwrap();
            evo.advance_to(black_box(1024));
            evo.min_value()
        })
    });
    let gasket = sierpinski_gasket(7).unwrap();
    group.bench_function("gasket/1024 steps", |b| {
        b.iter(|| {
            let mut evo = HeatKernelEvolution::new(&gasket, 0).unwrap();
            evo.advance_to(black_box(1024));
            evo.min_value()
        })
    });
    group.finish();
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = capacity, exit_times, heat_kernel
}
criterion_main!(benches);
