use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use hybeam::exec::Execution;
use hybeam::experiments::{rms_samples_with, run_scenario_with, Scenario, Scheme};

fn scenario() -> Scenario {
    let mut s = Scenario::rich("bench", vec![Scheme::Capacity, Scheme::RfLTapZf, Scheme::Rf1Tap]);
    s.dims.antennas = 64;
    s.dims.subcarriers = 64;
    s.realizations = 16;
    s.snr_db = vec![0.0, 10.0, 20.0];
    s
}

fn executions() -> [(&'static str, Execution); 2] {
    [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)]
}

fn rates(c: &mut Criterion) {
    let s = scenario();
    let mut group = c.benchmark_group("run_scenario");
    group.sample_size(10);
    for (name, exec) in executions() {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| black_box(run_scenario_with(&s, exec).unwrap()))
        });
    }
    group.finish();
}

fn delay_spread(c: &mut Criterion) {
    let s = scenario();
    let mut group = c.benchmark_group("rms_samples");
    group.sample_size(10);
    for (name, exec) in executions() {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| black_box(rms_samples_with(&s, 200, exec).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, rates, delay_spread);
criterion_main!(benches);
