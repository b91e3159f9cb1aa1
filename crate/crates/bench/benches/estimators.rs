use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use fbsde_bench::example1_path;
use fbsde_core::bandwidth::{select_bandwidth, CvConfig};
use fbsde_core::el::el_interval;
use fbsde_core::estimators::kernel_sums;
use fbsde_core::sim::simulate_path;
use fbsde_core::{KernelSpec, Method, ModelSpec, Target};

const EPA: KernelSpec = KernelSpec::EPANECHNIKOV;

fn simulation(c: &mut Criterion) {
    let model = ModelSpec::example1();
    c.bench_function("simulate_path/n=5000", |b| {
        b.iter(|| simulate_path(&model, 10.0, 5000, black_box(3)))
    });
}

fn sums(c: &mut Criterion) {
    let mut group = c.benchmark_group("kernel_sums");
    for n in [1000, 5000, 20_000] {
        let path = example1_path(n);
        group.bench_with_input(BenchmarkId::from_parameter(n), &path, |b, p| {
            b.iter(|| kernel_sums(p, black_box(0.0), 0.2, &EPA))
        });
    }
    group.finish();
}

fn cross_validation(c: &mut Criterion) {
    let path = example1_path(5000);
    let mut group = c.benchmark_group("select_bandwidth");
    group.sample_size(10);
    for method in [Method::Nw, Method::Ll] {
        let config = CvConfig::for_path(&path, Target::GeneratorF, method);
        group.bench_function(method.to_string(), |b| {
            b.iter(|| select_bandwidth(&path, &config, &EPA))
        });
    }
    group.finish();
}

fn intervals(c: &mut Criterion) {
    let path = example1_path(5000);
    let mut group = c.benchmark_group("el_interval");
    for target in [Target::GeneratorF, Target::ZSquared] {
        group.bench_function(target.to_string(), |b| {
            b.iter(|| el_interval(&path, black_box(0.0), 0.2, &EPA, target, 0.05))
        });
    }
    group.finish();
}

criterion_group!(benches, simulation, sums, cross_validation, intervals);
criterion_main!(benches);
