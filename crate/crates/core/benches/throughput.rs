use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use noma_awggn::cli::{run_sweep, Metric, RunConfig};
use noma_awggn::exec::Execution;
use noma_awggn::mc::{simulate_ber, McSettings};
use noma_awggn::noma::SystemConfig;

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn simulation(c: &mut Criterion) {
    let cfg = SystemConfig::three_user_default().with_alpha(1.0).unwrap().with_snr_db(20.0).unwrap();
    let model = cfg.noise_model().unwrap();
    let mut group = c.benchmark_group("simulate_ber_200k");
    group.sample_size(10);
    for (name, exec) in MODES {
        let settings = McSettings::new(200_000, 1).with_exec(exec);
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| simulate_ber(black_box(&cfg), &model, &settings).unwrap())
        });
    }
    group.finish();
}

fn analytic_sweep(c: &mut Criterion) {
    let cfg = RunConfig {
        alpha: 0.7,
        ..RunConfig::default()
    };
    let mut group = c.benchmark_group("union_bound_sweep");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| run_sweep(black_box(&cfg), &[Metric::BerUnion, Metric::PepAnalytic], exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, simulation, analytic_sweep);
criterion_main!(benches);
