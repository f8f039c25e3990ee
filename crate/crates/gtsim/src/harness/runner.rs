//! Experiment orchestration: resolve a config into concrete objects
//! (fail-fast, before any output exists), run the method/schedule/topology
//! grid over Monte Carlo trials, fold trial streams into means, evaluate the
//! enabled bound checks, and persist CSV + manifest + bound report.

use std::ops::Range;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use rand::Rng;

use crate::algorithms::{self, Method, RunOptions, StepSchedule, Trajectory};
use crate::analysis::{self, BoundInputs, BoundReport, MetricsRecord, TrialAverager};
use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::objectives::{self, ObjectiveSuite, PartitionStrategy};
use crate::oracles::{gaussian_oracle, sampling_oracle, GradientOracle};
use crate::rng;
use crate::topology::{
    build_complete_graph, build_exponential_graph, build_geometric_graph, build_grid_graph,
    default_geometric_radius, equal_weights, lazy_metropolis_weights, metropolis_weights, Graph,
    WeightMatrix,
};

use super::config::{
    AlphaSpec, BoundsMode, ExperimentConfig, Family, ItersSpec, OracleSpec, ScheduleSpec,
    SuiteSpec, TopologySpec, WeightRule, X0Spec,
};
use super::output;
use super::{RunManifest, ScheduleManifest, SuiteManifest, TopologyManifest};

/// Stream slot reserved for per-trial initial-point draws.
const X0_STREAM_NODE: u64 = u64::MAX - 9;

#[derive(Debug, Clone)]
pub struct ResolvedTopology {
    pub spec: TopologySpec,
    pub graph: Graph,
    pub weights: WeightMatrix,
}

#[derive(Debug)]
pub struct Resolved {
    pub topologies: Vec<ResolvedTopology>,
    pub suite: Arc<ObjectiveSuite>,
    pub iters: u64,
    pub schedules: Vec<(String, StepSchedule)>,
    /// Largest lambda over the experiment's topologies (0 when none).
    pub lambda_max: f64,
    pub dataset_counts: Option<Vec<usize>>,
}

pub fn build_topology(spec: &TopologySpec) -> Result<ResolvedTopology> {
    let graph = match spec.family {
        Family::Exponential => build_exponential_graph(spec.n)?,
        Family::Grid => {
            if spec.rows * spec.cols != spec.n {
                return Err(Error::Config(format!(
                    "grid rows*cols = {} does not match n = {}",
                    spec.rows * spec.cols,
                    spec.n
                )));
            }
            build_grid_graph(spec.rows, spec.cols)?
        }
        Family::Geometric => {
            let r = spec.radius.unwrap_or_else(|| default_geometric_radius(spec.n));
            build_geometric_graph(spec.n, r, spec.graph_seed)?
        }
        Family::Complete => build_complete_graph(spec.n)?,
    };
    let weights = match spec.weights {
        WeightRule::Equal => equal_weights(&graph)?,
        WeightRule::Metropolis => metropolis_weights(&graph)?,
        WeightRule::LazyMetropolis => lazy_metropolis_weights(&graph)?,
        WeightRule::Auto => match spec.family {
            Family::Exponential | Family::Complete => equal_weights(&graph)?,
            Family::Grid | Family::Geometric => metropolis_weights(&graph)?,
        },
    };
    Ok(ResolvedTopology { spec: spec.clone(), graph, weights })
}

fn build_suite(cfg: &ExperimentConfig, n: usize) -> Result<Arc<ObjectiveSuite>> {
    let suite = match &cfg.suite {
        SuiteSpec::PlSynthetic { hetero_scale } => objectives::pl_synthetic_suite(n, *hetero_scale)?,
        SuiteSpec::Quadratic { offset_scale } => objectives::quadratic_suite(n, *offset_scale)?,
        SuiteSpec::NcvxLogistic { dataset, samples_per_node, dim, partition, data_seed, regularizer } => {
            let strategy = PartitionStrategy::parse(partition)?;
            let part = match dataset {
                Some(path) => load_dataset(Path::new(path), strategy, n, *data_seed)?,
                None => objectives::synthetic_classification_partition(
                    n,
                    *samples_per_node,
                    *dim,
                    strategy,
                    *data_seed,
                )?,
            };
            objectives::ncvx_logistic_suite(part, *regularizer)?
        }
    };
    Ok(Arc::new(suite))
}

/// Read a delimited dataset file and split it across `n` nodes.
pub fn load_dataset(
    path: &Path,
    strategy: PartitionStrategy,
    n: usize,
    seed: u64,
) -> Result<objectives::DatasetPartition> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Dataset(format!("cannot read {}: {e}", path.display())))?;
    let samples = objectives::parse_dataset_text(&text)?;
    objectives::partition_samples(samples, n, strategy, seed)
}

fn resolve_schedule(
    spec: &ScheduleSpec,
    suite: &ObjectiveSuite,
    lambda_max: f64,
    n: usize,
    iters: u64,
) -> Result<StepSchedule> {
    let l = suite.l_smooth();
    let abar_pl = || -> Result<f64> {
        let mu = suite
            .mu()
            .ok_or_else(|| Error::Config("this schedule spec needs a PL constant (suite has none)".into()))?;
        analysis::max_stable_step_pl(l, mu, lambda_max)
    };
    Ok(match spec {
        ScheduleSpec::Constant { alpha } => {
            let a = match alpha {
                AlphaSpec::Value(v) => *v,
                AlphaSpec::StablePl(f) => f * abar_pl()?,
                AlphaSpec::StableNcvx(f) => f * analysis::max_stable_step_ncvx(l, lambda_max)?,
                AlphaSpec::Corollary1 => (n as f64 / iters as f64).sqrt(),
            };
            if !(a > 0.0 && a.is_finite()) {
                return Err(Error::Config(format!("resolved alpha must be positive, got {a}")));
            }
            StepSchedule::Constant { alpha: a }
        }
        ScheduleSpec::PolyDecay { delta, phi, epsilon } => {
            let mu = suite
                .mu()
                .ok_or_else(|| Error::Config("poly_decay needs a PL constant".into()))?;
            let delta = delta.unwrap_or(6.0 / mu);
            let phi = match phi {
                Some(v) => *v,
                None => {
                    let abar = abar_pl()?;
                    (delta / abar)
                        .powf(1.0 / epsilon)
                        .max(4.0 / (1.0 - lambda_max * lambda_max))
                }
            };
            StepSchedule::PolyDecay { delta, phi, epsilon: *epsilon }
        }
        ScheduleSpec::Harmonic { beta, gamma } => {
            let mu = suite
                .mu()
                .ok_or_else(|| Error::Config("harmonic schedule needs a PL constant".into()))?;
            let beta = beta.unwrap_or(6.0 / mu);
            let gamma = match gamma {
                Some(v) => *v,
                None => (beta / abar_pl()?).max(8.0 / (1.0 - lambda_max * lambda_max)),
            };
            StepSchedule::Harmonic { beta, gamma }
        }
    })
}

/// Resolve a typed config into concrete objects, validating every
/// precondition before any output file is created.
pub fn resolve(cfg: &ExperimentConfig) -> Result<Resolved> {
    let topologies: Vec<ResolvedTopology> =
        cfg.topologies.iter().map(build_topology).collect::<Result<_>>()?;
    let n = topologies
        .first()
        .map(|t| t.spec.n)
        .ok_or_else(|| Error::Config("need at least one topology".into()))?;
    if topologies.iter().any(|t| t.spec.n != n) {
        return Err(Error::Config("all topologies in one experiment must share the node count".into()));
    }
    let suite = build_suite(cfg, n)?;
    let dataset_counts = (0..n)
        .map(|i| suite.shard_len(i))
        .collect::<Option<Vec<usize>>>();
    let lambda_max = topologies.iter().map(|t| t.weights.lambda()).fold(0.0, f64::max);
    let iters = match cfg.run.iters {
        ItersSpec::Value(v) => v,
        ItersSpec::AutoTransient => {
            let mut worst = 0.0_f64;
            for t in &topologies {
                let inp = BoundInputs {
                    l: suite.l_smooth(),
                    mu: suite.mu(),
                    lambda: t.weights.lambda(),
                    n,
                    nu_a_sq: 0.0,
                    fgap0: 0.0,
                    grad0_sq: 0.0,
                };
                worst = worst.max(analysis::transient_time_ncvx(&inp)?.explicit_precondition);
            }
            worst.ceil() as u64
        }
    };
    if iters < 1 {
        return Err(Error::Config("iters must be >= 1".into()));
    }
    let schedules = cfg
        .schedules
        .iter()
        .map(|s| {
            resolve_schedule(s, &suite, lambda_max, n, iters)
                .map(|sched| (sched.label(), sched))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Resolved { topologies, suite, iters, schedules, lambda_max, dataset_counts })
}

/// Run trials with the rayon pool (ordered results). Falls back to the
/// sequential path when built without the `parallel` feature or when
/// `threads <= 1`.
pub fn run_trials_parallel<R: Send>(
    range: Range<u64>,
    threads: usize,
    f: impl Fn(u64) -> R + Sync,
) -> Vec<R> {
    #[cfg(feature = "parallel")]
    {
        if threads > 1 && range.end > range.start + 1 {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .expect("building the trial pool");
            return pool.install(|| {
                use rayon::prelude::*;
                range.into_par_iter().map(f).collect()
            });
        }
    }
    let _ = threads;
    run_trials_sequential(range, f)
}

/// Plain in-order trial loop.
pub fn run_trials_sequential<R>(range: Range<u64>, f: impl Fn(u64) -> R) -> Vec<R> {
    range.map(f).collect()
}

/// Trial parallelism: config value, else `GTSIM_THREADS`, else the
/// available cores.
pub fn trial_parallelism(cfg_value: Option<usize>) -> usize {
    if let Some(v) = cfg_value {
        return v.max(1);
    }
    if let Ok(v) = std::env::var("GTSIM_THREADS") {
        if let Ok(v) = v.parse::<usize>() {
            return v.max(1);
        }
    }
    std::thread::available_parallelism().map(|v| v.get()).unwrap_or(1)
}

/// One (method, schedule, topology) cell of the experiment grid.
#[derive(Debug, Clone)]
pub struct Combo {
    pub label: String,
    pub method: Method,
    pub topology: Option<usize>,
    pub schedule: usize,
}

fn combos(cfg: &ExperimentConfig, res: &Resolved) -> Vec<Combo> {
    let multi = res.topologies.len() > 1;
    let mut out = Vec::new();
    for (si, _) in res.schedules.iter().enumerate() {
        for method in &cfg.methods {
            if method.decentralized() {
                for (ti, topo) in res.topologies.iter().enumerate() {
                    let label = if multi {
                        format!("{}@{}", method.label(), topo.spec.name)
                    } else {
                        method.label().to_string()
                    };
                    out.push(Combo { label, method: *method, topology: Some(ti), schedule: si });
                }
            } else {
                out.push(Combo { label: method.label().to_string(), method: *method, topology: None, schedule: si });
            }
        }
    }
    out
}

/// Per-trial reductions kept after the stream is folded away.
#[derive(Debug, Clone)]
pub struct TrialSummary {
    pub trial: u64,
    pub diverged: Option<u64>,
    pub tracking_identity_max: f64,
    pub mean_dynamics_max: f64,
    pub final_loss: f64,
    pub running_avg_stationary: f64,
    pub last10_opt_gap_mean: Option<f64>,
    pub last10_consensus: Option<f64>,
    pub final_opt_gap_nodes: Option<f64>,
}

fn summarize(trial: u64, iters: u64, t: &Trajectory) -> TrialSummary {
    let recs = &t.records;
    let last = recs.last().expect("runs always record at least one row");
    let pre_final: Vec<&MetricsRecord> = recs.iter().filter(|r| r.k < iters).collect();
    let running_avg_stationary = if pre_final.is_empty() {
        last.stationary_gap_avg
    } else {
        pre_final.iter().map(|r| r.stationary_gap_avg).sum::<f64>() / pre_final.len() as f64
    };
    let cutoff = (0.9 * iters as f64) as u64;
    let tail: Vec<&MetricsRecord> = recs.iter().filter(|r| r.k >= cutoff).collect();
    let tail_mean = |get: &dyn Fn(&MetricsRecord) -> Option<f64>| -> Option<f64> {
        let vals: Vec<f64> = tail.iter().filter_map(|r| get(r)).collect();
        (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
    };
    TrialSummary {
        trial,
        diverged: t.diverged,
        tracking_identity_max: t.tracking_identity_max,
        mean_dynamics_max: t.mean_dynamics_max,
        final_loss: last.loss,
        running_avg_stationary,
        last10_opt_gap_mean: tail_mean(&|r| r.opt_gap_mean),
        last10_consensus: tail_mean(&|r| r.consensus_err),
        final_opt_gap_nodes: last.opt_gap_nodes,
    }
}

/// Everything produced by one experiment run.
#[derive(Debug)]
pub struct ExperimentOutcome {
    pub manifest: RunManifest,
    pub bound_reports: Vec<BoundReport>,
    pub rate_fits: Vec<(String, Option<f64>)>,
    pub diverged_trials: Vec<(String, u64, u64)>,
    pub all_bounds_pass: bool,
    pub csv_path: PathBuf,
    pub mean_csv_path: PathBuf,
    pub manifest_path: PathBuf,
    pub bounds_path: PathBuf,
}

struct ComboResult {
    combo: Combo,
    mean: Vec<MetricsRecord>,
    summaries: Vec<TrialSummary>,
    schedule: StepSchedule,
}

fn run_combo(
    cfg: &ExperimentConfig,
    res: &Resolved,
    combo: &Combo,
    threads: usize,
    csv: &mut output::CsvWriter,
    states_dir: Option<&Path>,
) -> Result<ComboResult> {
    let (_, schedule) = &res.schedules[combo.schedule];
    let w = combo.topology.map(|ti| &res.topologies[ti].weights);
    let suite = &res.suite;
    let master = cfg.run.seed;
    let opts = RunOptions {
        iters: res.iters,
        metric_stride: cfg.run.metric_stride,
        snapshot_stride: cfg.run.snapshot_stride,
        record_snapshots: cfg.run.state_csv,
    };
    let run_one = |trial: u64| -> Result<Trajectory> {
        let x0 = trial_x0(&cfg.run.x0, suite.p(), master, trial);
        let oracle = build_oracle(&cfg.oracle, suite.clone(), master, trial, &x0)?;
        algorithms::run(combo.method, w, oracle, schedule, &x0, &opts)
    };
    let mut averager = TrialAverager::new();
    let mut summaries = Vec::with_capacity(cfg.run.trials as usize);
    let chunk = (threads.max(1) * 2) as u64;
    let mut start = 0u64;
    while start < cfg.run.trials {
        let end = (start + chunk).min(cfg.run.trials);
        let results = run_trials_parallel(start..end, threads, &run_one);
        for (offset, result) in results.into_iter().enumerate() {
            let trial = start + offset as u64;
            let traj = result?;
            if traj.diverged.is_none() {
                averager.fold(&traj.records)?;
            }
            csv.write_records(&trial.to_string(), &combo.label, &traj.records)?;
            if let (Some(dir), 0) = (states_dir, trial) {
                output::write_state_snapshots(dir, &combo.label, &traj.snapshots)?;
            }
            summaries.push(summarize(trial, res.iters, &traj));
        }
        start = end;
    }
    let mean = if averager.trials() > 0 { averager.mean() } else { Vec::new() };
    Ok(ComboResult { combo: combo.clone(), mean, summaries, schedule: *schedule })
}

fn trial_x0(spec: &X0Spec, p: usize, master: u64, trial: u64) -> Vec<f64> {
    match spec {
        X0Spec::Constant(v) => vec![*v; p],
        X0Spec::Gaussian(std) => {
            let mut g = rng::stream(master, trial, X0_STREAM_NODE);
            (0..p)
                .map(|_| *std * g.sample::<f64, _>(rand_distr::StandardNormal))
                .collect()
        }
    }
}

fn build_oracle(
    spec: &OracleSpec,
    suite: Arc<ObjectiveSuite>,
    master: u64,
    trial: u64,
    x0: &[f64],
) -> Result<GradientOracle> {
    match spec {
        OracleSpec::Gaussian { sigma } => gaussian_oracle(suite, &[*sigma], master, trial),
        OracleSpec::Sampling { batch } => sampling_oracle(suite, *batch, master, trial, x0),
    }
}

fn bound_inputs(
    res: &Resolved,
    cfg: &ExperimentConfig,
    lambda: f64,
) -> Result<(BoundInputs, String)> {
    let suite = &res.suite;
    let x0 = match cfg.run.x0 {
        X0Spec::Constant(v) => vec![v; suite.p()],
        X0Spec::Gaussian(_) => {
            return Err(Error::Analysis("bound checks need a constant x0".into()));
        }
    };
    let (fgap0, mut note) = match suite.f_star() {
        Some(fs) => (suite.global_value(&x0) - fs, String::new()),
        None => (suite.global_value(&x0), "F* unknown, gap bounded via F >= 0; ".to_string()),
    };
    let x0_mat = Mat::from_broadcast_row(suite.n(), &x0);
    let grad0_sq = suite.stacked_grad_norm_sq(&x0_mat);
    let oracle = build_oracle(&cfg.oracle, suite.clone(), cfg.run.seed, 0, &x0)?;
    if oracle.nu_estimated() {
        note.push_str("estimated-nu at x0; ");
    }
    if cfg.run.metric_stride > 1 {
        note.push_str("metrics subsampled; ");
    }
    Ok((
        BoundInputs {
            l: suite.l_smooth(),
            mu: suite.mu(),
            lambda,
            n: suite.n(),
            nu_a_sq: oracle.nu_a_sq(),
            fgap0,
            grad0_sq,
        },
        note,
    ))
}

fn check_bounds(
    cfg: &ExperimentConfig,
    res: &Resolved,
    result: &ComboResult,
    reports: &mut Vec<BoundReport>,
    notes: &mut Vec<String>,
) -> Result<()> {
    if result.combo.method != Method::GtDsgd || cfg.run.bounds == BoundsMode::Off {
        return Ok(());
    }
    let Some(ti) = result.combo.topology else { return Ok(()) };
    if result.summaries.iter().any(|s| s.diverged.is_some()) || result.mean.is_empty() {
        notes.push(format!("{}: bound checks skipped (divergence)", result.combo.label));
        return Ok(());
    }
    let lambda = res.topologies[ti].weights.lambda();
    let (inputs, note_prefix) = match bound_inputs(res, cfg, lambda) {
        Ok(v) => v,
        Err(e) => {
            notes.push(format!("{}: bound checks skipped ({e})", result.combo.label));
            return Ok(());
        }
    };
    let trials = result.summaries.len();
    let label = &result.combo.label;
    let mean_ks: Vec<u64> = result.mean.iter().map(|r| r.k).collect();
    let nf = inputs.n as f64;

    let mut lemma16 = |reports: &mut Vec<BoundReport>| -> Result<()> {
        let c = analysis::lemma_constants(&inputs)?;
        let vals: Vec<f64> = result
            .mean
            .iter()
            .filter_map(|r| r.tracking_err.map(|v| v * nf))
            .collect();
        let ks: Vec<u64> = result
            .mean
            .iter()
            .filter(|r| r.tracking_err.is_some())
            .map(|r| r.k)
            .collect();
        reports.push(analysis::bound_check_stream(
            "lemma16",
            &ks,
            &vals,
            trials,
            |_| c.y_hat,
            &format!("{note_prefix}{label}: sup_k n*tracking_err <= y_hat"),
        ));
        Ok(())
    };

    match result.schedule {
        StepSchedule::Constant { alpha } => {
            match analysis::theorem2_steady_state(&inputs, alpha) {
                Ok(ss) => {
                    let gaps: Vec<f64> = result
                        .summaries
                        .iter()
                        .filter_map(|s| s.last10_opt_gap_mean)
                        .collect();
                    if !gaps.is_empty() {
                        reports.push(analysis::bound_check_scalar(
                            "theorem2_ss",
                            &gaps,
                            ss.opt_gap_ss,
                            &format!("{note_prefix}{label}: last-10% E[F(xbar)-F*]"),
                        ));
                    }
                    let cons: Vec<f64> = result
                        .summaries
                        .iter()
                        .filter_map(|s| s.last10_consensus)
                        .collect();
                    if !cons.is_empty() {
                        reports.push(analysis::bound_check_scalar(
                            "theorem2_ss",
                            &cons,
                            ss.consensus_ss,
                            &format!("{note_prefix}{label}: last-10% E||x-Jx||^2/n"),
                        ));
                    }
                    lemma16(reports)?;
                }
                Err(Error::StepOutOfRange { .. }) | Err(Error::Analysis(_)) => {
                    // fall back to the non-convex bound when claimed
                    match analysis::theorem1_bound(&inputs, alpha, res.iters.max(2)) {
                        Ok(b) => {
                            let avgs: Vec<f64> =
                                result.summaries.iter().map(|s| s.running_avg_stationary).collect();
                            reports.push(analysis::bound_check_scalar(
                                "theorem1",
                                &avgs,
                                b.total(),
                                &format!("{note_prefix}{label}: running-average stationary gap"),
                            ));
                        }
                        Err(Error::StepOutOfRange { alpha, max }) => notes.push(format!(
                            "{label}: alpha = {alpha} above the claimed range (max {max}); bound not evaluated"
                        )),
                        Err(e) => return Err(e),
                    }
                }
                Err(e) => return Err(e),
            }
        }
        StepSchedule::Harmonic { beta, gamma } => {
            match analysis::theorem4_bound(&inputs, beta, gamma, res.iters) {
                Ok(bound) => {
                    let finals: Vec<f64> = result
                        .summaries
                        .iter()
                        .filter_map(|s| s.final_opt_gap_nodes)
                        .collect();
                    if !finals.is_empty() {
                        reports.push(analysis::bound_check_scalar(
                            "theorem4",
                            &finals,
                            bound,
                            &format!("{note_prefix}{label}: mean node optimality gap at K"),
                        ));
                    }
                    let c = analysis::lemma_constants(&inputs)?;
                    let vals: Vec<f64> = result
                        .mean
                        .iter()
                        .filter_map(|r| r.consensus_err.map(|v| v * nf))
                        .collect();
                    reports.push(analysis::bound_check_stream(
                        "lemma18",
                        &mean_ks[..vals.len()],
                        &vals,
                        trials,
                        |k| c.x_hat * beta * beta / ((k as f64 + gamma) * (k as f64 + gamma)),
                        &format!("{note_prefix}{label}: n*consensus_err <= x_hat b^2/(k+g)^2"),
                    ));
                    lemma16(reports)?;
                }
                Err(Error::Schedule(msg)) => {
                    notes.push(format!("{label}: harmonic bound not claimed ({msg})"))
                }
                Err(e) => return Err(e),
            }
        }
        StepSchedule::PolyDecay { .. } => {
            // covered by the per-schedule rate fits
        }
    }
    Ok(())
}

fn rate_fit_for(result: &ComboResult, window: (u64, u64)) -> Option<(String, Option<f64>)> {
    if !matches!(result.schedule, StepSchedule::Harmonic { .. } | StepSchedule::PolyDecay { .. }) {
        return None;
    }
    let ks: Vec<u64> = result.mean.iter().map(|r| r.k).collect();
    let vals: Vec<f64> = result
        .mean
        .iter()
        .map(|r| r.opt_gap_nodes.unwrap_or(f64::NAN))
        .collect();
    if vals.iter().any(|v| v.is_nan()) {
        return None;
    }
    let slope = analysis::rate_fit(&ks, &vals, window.0, window.1.min(*ks.last()?)).ok();
    Some((
        format!("{} {} slope[{}..{}]", result.combo.label, result.schedule.label(), window.0, window.1),
        slope,
    ))
}

/// Run the full experiment grid and write `metrics.csv`, `metrics_mean.csv`,
/// `bounds.txt`, and `manifest.json` under `out_dir`.
pub fn run_experiment(cfg: &ExperimentConfig, out_dir: &Path, quiet: bool) -> Result<ExperimentOutcome> {
    let started = Instant::now();
    let res = resolve(cfg)?;
    let threads = trial_parallelism(cfg.run.parallelism);

    std::fs::create_dir_all(out_dir)?;
    let csv_path = out_dir.join("metrics.csv");
    let mean_csv_path = out_dir.join("metrics_mean.csv");
    let manifest_path = out_dir.join("manifest.json");
    let bounds_path = out_dir.join("bounds.txt");
    let states_dir = cfg.run.state_csv.then(|| out_dir.join("states"));
    if let Some(dir) = &states_dir {
        std::fs::create_dir_all(dir)?;
    }

    let mut csv = output::CsvWriter::create(&csv_path)?;
    let mut results = Vec::new();
    for combo in combos(cfg, &res) {
        if !quiet {
            eprintln!("running {} x {} trials ({} iters)", combo.label, cfg.run.trials, res.iters);
        }
        results.push(run_combo(cfg, &res, &combo, threads, &mut csv, states_dir.as_deref())?);
    }

    let mut bound_reports = Vec::new();
    let mut notes = Vec::new();
    for r in &results {
        check_bounds(cfg, &res, r, &mut bound_reports, &mut notes)?;
    }
    let rate_fits: Vec<(String, Option<f64>)> = results
        .iter()
        .filter_map(|r| rate_fit_for(r, cfg.run.rate_window))
        .collect();

    for report in &bound_reports {
        csv.write_raw(&output::bound_row(report))?;
    }
    csv.finish()?;

    let mut mean_csv = output::CsvWriter::create(&mean_csv_path)?;
    for r in &results {
        mean_csv.write_records("mean", &r.combo.label, &r.mean)?;
    }
    mean_csv.finish()?;

    let diverged_trials: Vec<(String, u64, u64)> = results
        .iter()
        .flat_map(|r| {
            r.summaries
                .iter()
                .filter_map(|s| s.diverged.map(|k| (r.combo.label.clone(), s.trial, k)))
        })
        .collect();

    let epochs = res.dataset_counts.as_ref().map(|counts| {
        let m = *counts.iter().min().unwrap() as f64;
        let b = match cfg.oracle {
            OracleSpec::Sampling { batch } => batch as f64,
            _ => m,
        };
        res.iters as f64 / (m / b)
    });

    let manifest = RunManifest {
        artifact_version: env!("CARGO_PKG_VERSION").to_string(),
        created_unix_ms: std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_millis())
            .unwrap_or(0),
        config: cfg.raw.clone(),
        topologies: res
            .topologies
            .iter()
            .map(|t| TopologyManifest {
                name: t.spec.name.clone(),
                family: t.spec.family,
                n: t.spec.n,
                lambda: t.weights.lambda(),
            })
            .collect(),
        suite: SuiteManifest {
            kind: match cfg.suite {
                SuiteSpec::PlSynthetic { .. } => "pl_synthetic".into(),
                SuiteSpec::Quadratic { .. } => "quadratic".into(),
                SuiteSpec::NcvxLogistic { .. } => "ncvx_logistic".into(),
            },
            n: res.suite.n(),
            p: res.suite.p(),
            l_smooth: res.suite.l_smooth(),
            mu: res.suite.mu(),
            f_star: res.suite.f_star(),
            dataset_counts: res.dataset_counts.clone(),
        },
        nu_a_sq: build_oracle(
            &cfg.oracle,
            res.suite.clone(),
            cfg.run.seed,
            0,
            &trial_x0(&cfg.run.x0, res.suite.p(), cfg.run.seed, 0),
        )?
        .nu_a_sq(),
        schedules: res
            .schedules
            .iter()
            .map(|(label, sched)| {
                let report = algorithms::validate_schedule(
                    sched,
                    res.suite.l_smooth(),
                    res.suite.mu(),
                    res.lambda_max,
                )?;
                Ok(ScheduleManifest { label: label.clone(), theory_conditions_pass: report.pass })
            })
            .collect::<Result<_>>()?,
        iters: res.iters,
        epochs,
        trials: cfg.run.trials,
        master_seed: cfg.run.seed,
        trial_seeds: (0..cfg.run.trials).map(|t| rng::stream_seed(cfg.run.seed, t, 0)).collect(),
        threads,
        wall_clock_ms: 0,
        notes: notes.clone(),
    };
    let mut manifest = manifest;
    manifest.wall_clock_ms = started.elapsed().as_millis();
    output::write_manifest(&manifest_path, &manifest)?;
    output::write_bounds_txt(&bounds_path, &bound_reports, &rate_fits, &notes)?;

    let final_losses: Vec<(String, f64)> = results
        .iter()
        .map(|r| {
            let losses: Vec<f64> = r.summaries.iter().map(|s| s.final_loss).collect();
            (r.combo.label.clone(), analysis::mean_stderr(&losses).0)
        })
        .collect();
    if !quiet {
        for (label, loss) in &final_losses {
            eprintln!("{label}: trial-mean final loss = {loss}");
        }
        for rep in &bound_reports {
            eprintln!(
                "bound {}: measured {} vs bound {} -> {}",
                rep.name,
                rep.measured,
                rep.value,
                if rep.pass { "pass" } else { "FAIL" }
            );
        }
    }

    let all_bounds_pass = bound_reports.iter().all(|r| r.pass);
    Ok(ExperimentOutcome {
        manifest,
        bound_reports,
        rate_fits,
        diverged_trials,
        all_bounds_pass,
        csv_path,
        mean_csv_path,
        manifest_path,
        bounds_path,
    })
}
