use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use milnor_bench::{circle, fibonacci_sphere};
use milnor_core::estimator::{chi_scan, rips_chi, Ladder, LadderBase, RipsOptions, ScanOptions};
use std::hint::black_box;

fn single_scale(c: &mut Criterion) {
    let mut group = c.benchmark_group("rips_chi_sphere");
    for n in [250, 500, 1000] {
        let pts = fibonacci_sphere(n);
        let spacing = (4.0 * std::f64::consts::PI / n as f64).sqrt();
        group.bench_with_input(BenchmarkId::from_parameter(n), &pts, |b, pts| {
            b.iter(|| rips_chi(black_box(pts), 3, 3.0 * spacing, &RipsOptions::default()).unwrap())
        });
    }
    group.finish();
}

fn full_scan(c: &mut Criterion) {
    let pts = circle(800);
    let opts = ScanOptions {
        ladder: Ladder { base: LadderBase::Absolute(std::f64::consts::TAU / 800.0), ..Ladder::default() },
        ..ScanOptions::default()
    };
    c.bench_function("chi_scan_circle_800", |b| {
        b.iter(|| chi_scan(black_box(&pts), 2, None, &opts).unwrap())
    });
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = single_scale, full_scan
}
criterion_main!(benches);
