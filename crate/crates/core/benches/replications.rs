//! Replication throughput on the calling thread versus the rayon pool.
//! Without the `parallel` feature both variants run sequentially.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use plugin_fdr::discrete::AdjustmentKind;
use plugin_fdr::estimators::EstimatorSpec;
use plugin_fdr::oracles::irwin_hall_inverse_moment;
use plugin_fdr::par::Execution;
use plugin_fdr::simulation::{run_experiment, ExperimentEntry, ExperimentOptions, FetConfig, GaussianConfig, Setting};

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn options(execution: Execution) -> ExperimentOptions {
    ExperimentOptions {
        rand_reps: 100,
        allow_unguaranteed: false,
        include_reference: true,
        execution,
    }
}

fn gaussian(c: &mut Criterion) {
    let mut cfg = GaussianConfig::new(500, 0.8, 2.0);
    cfg.replications = 200;
    cfg.seed = 7;
    let setting = Setting::Gaussian(cfg);
    let entries: Vec<ExperimentEntry> = [
        EstimatorSpec::storey(0.5),
        EstimatorSpec::PcNew,
        EstimatorSpec::poly(1.0, 0.5),
        EstimatorSpec::poly(2.0, 0.5),
    ]
    .into_iter()
    .map(ExperimentEntry::plain)
    .collect();
    let mut group = c.benchmark_group("gaussian_m500_r200");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| run_experiment(black_box(&setting), &entries, &options(exec)).unwrap())
        });
    }
    group.finish();
}

fn fet_discrete(c: &mut Criterion) {
    let mut cfg = FetConfig::with_pi0(100, 0.7);
    cfg.replications = 50;
    cfg.seed = 7;
    let setting = Setting::Fet(cfg);
    let entries: Vec<ExperimentEntry> = [
        AdjustmentKind::None,
        AdjustmentKind::Du,
        AdjustmentKind::Mid,
        AdjustmentKind::Rand,
    ]
    .into_iter()
    .map(|a| ExperimentEntry::adjusted(EstimatorSpec::storey(0.5), a))
    .collect();
    let mut group = c.benchmark_group("fet_m100_r50");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| run_experiment(black_box(&setting), &entries, &options(exec)).unwrap())
        });
    }
    group.finish();
}

fn irwin_hall(c: &mut Criterion) {
    let mut group = c.benchmark_group("irwin_hall_k5_200k");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| irwin_hall_inverse_moment(5, black_box(200_000), 3, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, gaussian, fet_discrete, irwin_hall);
criterion_main!(benches);
