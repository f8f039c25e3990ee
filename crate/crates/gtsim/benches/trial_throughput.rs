//! Monte Carlo trial throughput: rayon-parallel trial execution against the
//! sequential path on the same workload (a tracked run on the 16-node
//! exponential graph with Gaussian noise).

use std::sync::Arc;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use gtsim::algorithms::{run, Method, RunOptions, StepSchedule};
use gtsim::harness::{run_trials_parallel, run_trials_sequential, trial_parallelism};
use gtsim::objectives::pl_synthetic_suite;
use gtsim::oracles::gaussian_oracle;
use gtsim::topology::{build_exponential_graph, equal_weights};

fn one_trial(suite: &Arc<gtsim::objectives::ObjectiveSuite>, w: &gtsim::topology::WeightMatrix, trial: u64) -> f64 {
    let oracle = gaussian_oracle(suite.clone(), &[0.5], 42, trial).unwrap();
    let sched = StepSchedule::Constant { alpha: 5e-4 };
    let mut opts = RunOptions::new(2_000);
    opts.metric_stride = 10;
    let t = run(Method::GtDsgd, Some(w), oracle, &sched, &[0.5], &opts).unwrap();
    t.records.last().unwrap().loss
}

fn bench_trials(c: &mut Criterion) {
    let suite = Arc::new(pl_synthetic_suite(16, 0.1).unwrap());
    let w = equal_weights(&build_exponential_graph(16).unwrap()).unwrap();
    let trials = 16u64;
    let threads = trial_parallelism(None);

    let mut group = c.benchmark_group("trial_throughput");
    group.sample_size(10);
    group.bench_function(BenchmarkId::new("sequential", trials), |b| {
        b.iter(|| {
            let out = run_trials_sequential(0..trials, |t| one_trial(&suite, &w, t));
            criterion::black_box(out)
        })
    });
    group.bench_function(BenchmarkId::new(format!("parallel_{threads}"), trials), |b| {
        b.iter(|| {
            let out = run_trials_parallel(0..trials, threads, |t| one_trial(&suite, &w, t));
            criterion::black_box(out)
        })
    });
    group.finish();
}

criterion_group!(benches, bench_trials);
criterion_main!(benches);
