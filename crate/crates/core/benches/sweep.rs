use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use fastlimit::lab::{setup, sweep, Config};
use fastlimit::Execution;

fn small_sweep(exec: Execution) -> fastlimit::lab::SweepSpec {
    let cfg = Config::parse("cells = 128\nt_final = 0.05\nk_values = 1e1, 1e2, 1e3, 1e4\n").unwrap();
    setup::sweep_from_config(&cfg, exec).unwrap()
}

fn bench_sweep(c: &mut Criterion) {
    let mut group = c.benchmark_group("sweep");
    group.sample_size(10);
    for (name, exec) in [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)] {
        let spec = small_sweep(exec);
        group.bench_with_input(BenchmarkId::from_parameter(name), &spec, |b, spec| {
            b.iter(|| sweep(spec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_sweep);
criterion_main!(benches);
