//! Iteration engines: the gradient-tracking method, the plain decentralized
//! baseline, and the centralized minibatch comparator, plus step-size
//! schedules and the run loop that records trajectories.
//!
//! One tracked step at a fixed mixing matrix `W`:
//!
//! ```text
//! y_{k+1} = W (y_k + g_k - g_{k-1})
//! x_{k+1} = W (x_k - alpha_k y_{k+1})
//! ```
//!
//! with `y_0 = 0` and `g_{-1} = 0`. The network mean of the tracker always
//! equals the mean of the latest sampled gradients; the run loop measures
//! that identity every iteration and keeps the worst violation.

use crate::analysis::{self, MetricsRecord};
use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::oracles::GradientOracle;
use crate::topology::WeightMatrix;

/// Coordinates beyond this magnitude abort the run as diverged.
pub const DIVERGENCE_LIMIT: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    GtDsgd,
    Dsgd,
    Centralized,
}

impl Method {
    pub fn label(&self) -> &'static str {
        match self {
            Method::GtDsgd => "gt_dsgd",
            Method::Dsgd => "dsgd",
            Method::Centralized => "centralized",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "gt_dsgd" => Ok(Method::GtDsgd),
            "dsgd" => Ok(Method::Dsgd),
            "centralized" => Ok(Method::Centralized),
            other => Err(Error::Config(format!(
                "unknown method {other:?} (accepted: gt_dsgd, dsgd, centralized)"
            ))),
        }
    }

    pub fn decentralized(&self) -> bool {
        !matches!(self, Method::Centralized)
    }
}

/// Step-size schedule `alpha_k`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StepSchedule {
    Constant { alpha: f64 },
    /// `alpha_k = delta (k + phi)^{-epsilon}` with `epsilon` in (0.5, 1].
    PolyDecay { delta: f64, phi: f64, epsilon: f64 },
    /// `alpha_k = beta (k + gamma)^{-1}`.
    Harmonic { beta: f64, gamma: f64 },
}

impl StepSchedule {
    pub fn value(&self, k: u64) -> f64 {
        match *self {
            StepSchedule::Constant { alpha } => alpha,
            StepSchedule::PolyDecay { delta, phi, epsilon } => delta * (k as f64 + phi).powf(-epsilon),
            StepSchedule::Harmonic { beta, gamma } => beta / (k as f64 + gamma),
        }
    }

    pub fn label(&self) -> String {
        match *self {
            StepSchedule::Constant { alpha } => format!("constant(alpha={alpha})"),
            StepSchedule::PolyDecay { delta, phi, epsilon } => {
                format!("poly_decay(delta={delta},phi={phi},epsilon={epsilon})")
            }
            StepSchedule::Harmonic { beta, gamma } => format!("harmonic(beta={beta},gamma={gamma})"),
        }
    }
}

pub use crate::analysis::{max_stable_step_ncvx, max_stable_step_pl};

/// One named schedule condition.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ScheduleCheck {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct ScheduleReport {
    pub checks: Vec<ScheduleCheck>,
    pub pass: bool,
}

fn check(name: &str, pass: bool, detail: String) -> ScheduleCheck {
    ScheduleCheck { name: name.into(), pass, detail }
}

/// Validate a schedule against the stability conditions of the convergence
/// results: constant steps against the applicable maximum, decaying steps
/// against their exponent/offset requirements.
pub fn validate_schedule(schedule: &StepSchedule, l: f64, mu: Option<f64>, lambda: f64) -> Result<ScheduleReport> {
    let mut checks = Vec::new();
    let q = 1.0 - lambda * lambda;
    match *schedule {
        StepSchedule::Constant { alpha } => {
            let (max, which) = match mu {
                Some(mu) => (max_stable_step_pl(l, mu, lambda)?, "alpha_bar (PL)"),
                None => (max_stable_step_ncvx(l, lambda)?, "alpha_bar (non-convex)"),
            };
            checks.push(check(
                "alpha <= alpha_bar",
                alpha > 0.0 && alpha <= max,
                if alpha <= max {
                    format!("alpha = {alpha} within {which} = {max}")
                } else {
                    format!("alpha = {alpha} exceeds {which} = {max}")
                },
            ));
        }
        StepSchedule::PolyDecay { delta, phi, epsilon } => {
            checks.push(check(
                "epsilon in (0.5, 1]",
                epsilon > 0.5 && epsilon <= 1.0,
                format!("epsilon = {epsilon}"),
            ));
            match mu {
                Some(mu) => {
                    let abar = max_stable_step_pl(l, mu, lambda)?;
                    checks.push(check("delta >= 1/mu", delta >= 1.0 / mu, format!("delta = {delta}, 1/mu = {}", 1.0 / mu)));
                    if epsilon > 0.5 && epsilon <= 1.0 {
                        let phi_min = (delta / abar).powf(1.0 / epsilon).max(4.0 / q);
                        checks.push(check(
                            "phi >= max{(delta/alpha_bar)^(1/epsilon), 4/(1-lambda^2)}",
                            phi >= phi_min,
                            format!("phi = {phi}, required {phi_min}"),
                        ));
                    }
                }
                None => checks.push(check("mu known", false, "decaying-step conditions need a PL constant".into())),
            }
        }
        StepSchedule::Harmonic { beta, gamma } => match mu {
            Some(mu) => {
                let abar = max_stable_step_pl(l, mu, lambda)?;
                checks.push(check("beta > 2/mu", beta > 2.0 / mu, format!("beta = {beta}, 2/mu = {}", 2.0 / mu)));
                let gamma_min = (beta / abar).max(8.0 / q);
                checks.push(check(
                    "gamma >= max{beta/alpha_bar, 8/(1-lambda^2)}",
                    gamma >= gamma_min,
                    format!("gamma = {gamma}, required {gamma_min}"),
                ));
            }
            None => checks.push(check("mu known", false, "harmonic-step conditions need a PL constant".into())),
        },
    }
    let pass = checks.iter().all(|c| c.pass);
    Ok(ScheduleReport { checks, pass })
}

/// Stacked per-node state of a decentralized run.
#[derive(Debug, Clone)]
pub struct AlgorithmState {
    pub k: u64,
    /// n x p node states.
    pub x: Mat,
    /// n x p gradient trackers (`y_0 = 0`).
    pub y: Mat,
    /// previous sampled gradients (`g_{-1} = 0`).
    pub g_prev: Mat,
}

impl AlgorithmState {
    /// All nodes start at the same point `x0`.
    pub fn new(n: usize, x0: &[f64]) -> Self {
        AlgorithmState {
            k: 0,
            x: Mat::from_broadcast_row(n, x0),
            y: Mat::zeros(n, x0.len()),
            g_prev: Mat::zeros(n, x0.len()),
        }
    }
}

/// Reused buffers for the steppers.
#[derive(Debug)]
pub struct StepScratch {
    /// Gradients drawn this iteration.
    pub g: Mat,
    pre: Mat,
    mixed: Mat,
}

impl StepScratch {
    pub fn new(n: usize, p: usize) -> Self {
        StepScratch { g: Mat::zeros(n, p), pre: Mat::zeros(n, p), mixed: Mat::zeros(n, p) }
    }
}

fn draw_gradients(oracle: &mut GradientOracle, x: &Mat, g: &mut Mat, k: u64) -> Result<()> {
    for i in 0..x.rows() {
        let xi = x.row(i);
        oracle.sample(i, xi, g.row_mut(i));
    }
    if g.iter().any(|v| !v.is_finite()) {
        return Err(Error::Diverged { k });
    }
    Ok(())
}

fn check_state(x: &Mat, k: u64) -> Result<()> {
    if x.iter().any(|v| !v.is_finite() || v.abs() > DIVERGENCE_LIMIT) {
        return Err(Error::Diverged { k });
    }
    Ok(())
}

#[cfg(debug_assertions)]
fn debug_check_contraction(w: &WeightMatrix, pre: &Mat, post: &Mat) {
    let before = pre.deviation_sq().sqrt();
    let after = post.deviation_sq().sqrt();
    debug_assert!(
        after <= w.lambda() * before + 1e-10,
        "mixing failed the contraction bound: {after} > {} * {before}",
        w.lambda()
    );
}

/// One tracked step. All nodes draw at the current state, then the tracker
/// and the state mix synchronously. The pre-mix tracker is accumulated as
/// `(y - g_prev) + g` so the n = 1 case telescopes exactly.
pub fn gt_dsgd_step(
    state: &mut AlgorithmState,
    w: &WeightMatrix,
    oracle: &mut GradientOracle,
    alpha: f64,
    scratch: &mut StepScratch,
) -> Result<()> {
    debug_assert!(alpha > 0.0);
    draw_gradients(oracle, &state.x, &mut scratch.g, state.k)?;
    let n = state.x.rows();
    for i in 0..n {
        let (y, gp, g) = (state.y.row(i), state.g_prev.row(i), scratch.g.row(i));
        for (((o, &yv), &gpv), &gv) in scratch.pre.row_mut(i).iter_mut().zip(y).zip(gp).zip(g) {
            *o = (yv - gpv) + gv;
        }
    }
    w.mix(&scratch.pre, &mut scratch.mixed);
    std::mem::swap(&mut state.y, &mut scratch.mixed);
    for i in 0..n {
        let (x, y) = (state.x.row(i), state.y.row(i));
        for ((o, &xv), &yv) in scratch.pre.row_mut(i).iter_mut().zip(x).zip(y) {
            *o = xv - alpha * yv;
        }
    }
    w.mix(&scratch.pre, &mut scratch.mixed);
    #[cfg(debug_assertions)]
    if state.k % 1024 == 0 {
        debug_check_contraction(w, &scratch.pre, &scratch.mixed);
    }
    std::mem::swap(&mut state.x, &mut scratch.mixed);
    std::mem::swap(&mut state.g_prev, &mut scratch.g);
    state.k += 1;
    check_state(&state.x, state.k)
}

/// One adapt-then-combine baseline step: `x_{k+1} = W (x_k - alpha_k g_k)`.
pub fn dsgd_step(
    state: &mut AlgorithmState,
    w: &WeightMatrix,
    oracle: &mut GradientOracle,
    alpha: f64,
    scratch: &mut StepScratch,
) -> Result<()> {
    debug_assert!(alpha > 0.0);
    draw_gradients(oracle, &state.x, &mut scratch.g, state.k)?;
    let n = state.x.rows();
    for i in 0..n {
        let (x, g) = (state.x.row(i), scratch.g.row(i));
        for ((o, &xv), &gv) in scratch.pre.row_mut(i).iter_mut().zip(x).zip(g) {
            *o = xv - alpha * gv;
        }
    }
    w.mix(&scratch.pre, &mut scratch.mixed);
    std::mem::swap(&mut state.x, &mut scratch.mixed);
    std::mem::swap(&mut state.g_prev, &mut scratch.g);
    state.k += 1;
    check_state(&state.x, state.k)
}

/// One centralized minibatch step at a shared iterate: `batch` draws, the
/// j-th from node `j mod n`'s oracle, so `batch = n` matches the network's
/// per-iteration sample count.
pub fn centralized_sgd_step(
    x: &mut [f64],
    oracle: &mut GradientOracle,
    alpha: f64,
    batch: usize,
    k: u64,
) -> Result<Vec<f64>> {
    debug_assert!(batch >= 1);
    let n = oracle.suite().n();
    let p = x.len();
    let mut mean = vec![0.0; p];
    let mut g = vec![0.0; p];
    for j in 0..batch {
        oracle.sample(j % n, x, &mut g);
        for (m, v) in mean.iter_mut().zip(&g) {
            *m += v;
        }
    }
    let inv = 1.0 / batch as f64;
    mean.iter_mut().for_each(|v| *v *= inv);
    if mean.iter().any(|v| !v.is_finite()) {
        return Err(Error::Diverged { k });
    }
    for (xi, gi) in x.iter_mut().zip(&mean) {
        *xi -= alpha * gi;
    }
    if x.iter().any(|v| !v.is_finite() || v.abs() > DIVERGENCE_LIMIT) {
        return Err(Error::Diverged { k: k + 1 });
    }
    Ok(mean)
}

/// Run controls. Scalar metric rows are recorded every `metric_stride`
/// iterations plus the final state; full-state snapshots (optional) every
/// `snapshot_stride`.
#[derive(Debug, Clone)]
pub struct RunOptions {
    pub iters: u64,
    pub metric_stride: u64,
    pub snapshot_stride: u64,
    pub record_snapshots: bool,
}

impl RunOptions {
    pub fn new(iters: u64) -> Self {
        RunOptions { iters, metric_stride: 1, snapshot_stride: 100, record_snapshots: false }
    }
}

/// A recorded run: strided metric rows, optional state snapshots, the
/// worst-case identity residuals, and divergence/box flags. Metadata is
/// enough to replay the run bit-identically.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub method: Method,
    pub n: usize,
    pub p: usize,
    pub lambda: Option<f64>,
    pub schedule: StepSchedule,
    pub records: Vec<MetricsRecord>,
    pub snapshots: Vec<(u64, Mat)>,
    /// max over k of the inf-norm of `ybar_{k+1} - gbar_k` (tracked method).
    pub tracking_identity_max: f64,
    /// max over k of the inf-norm of `xbar_{k+1} - (xbar_k - alpha_k gbar_k)`.
    pub mean_dynamics_max: f64,
    pub diverged: Option<u64>,
    pub left_operating_box: bool,
}

/// Execute `method` for `opts.iters` iterations. Divergence aborts the run
/// and returns the partial trajectory flagged with the iteration index.
pub fn run(
    method: Method,
    w: Option<&WeightMatrix>,
    mut oracle: GradientOracle,
    schedule: &StepSchedule,
    x0: &[f64],
    opts: &RunOptions,
) -> Result<Trajectory> {
    let suite = oracle.suite().clone();
    let n = suite.n();
    let p = suite.p();
    if x0.len() != p {
        return Err(Error::Config(format!("x0 has dimension {}, suite has {p}", x0.len())));
    }
    if method.decentralized() {
        let w = w.ok_or_else(|| Error::Config("decentralized methods need a weight matrix".into()))?;
        if w.n() != n {
            return Err(Error::Config(format!("weight matrix is {}x{0}, suite has n = {n}", w.n())));
        }
        run_decentralized(method, w, &mut oracle, schedule, x0, opts)
    } else {
        run_centralized(&mut oracle, schedule, x0, opts, n)
    }
}

fn box_violated(x: &Mat, suite_box: Option<(f64, f64)>) -> bool {
    match suite_box {
        Some((lo, hi)) => x.iter().any(|v| v < lo || v > hi),
        None => false,
    }
}

fn run_decentralized(
    method: Method,
    w: &WeightMatrix,
    oracle: &mut GradientOracle,
    schedule: &StepSchedule,
    x0: &[f64],
    opts: &RunOptions,
) -> Result<Trajectory> {
    let suite = oracle.suite().clone();
    let n = suite.n();
    let p = suite.p();
    let mut state = AlgorithmState::new(n, x0);
    let mut scratch = StepScratch::new(n, p);
    let mut records = Vec::new();
    let mut snapshots = Vec::new();
    let mut tracking_identity_max = 0.0_f64;
    let mut mean_dynamics_max = 0.0_f64;
    let mut diverged = None;
    let mut left_operating_box = false;
    let mut xbar_prev = vec![0.0; p];
    let mut xbar = vec![0.0; p];
    let mut gbar = vec![0.0; p];
    let mut ybar = vec![0.0; p];
    let tracked = method == Method::GtDsgd;

    for k in 0..opts.iters {
        let alpha = schedule.value(k);
        let mut row_idx = None;
        if k % opts.metric_stride == 0 {
            records.push(analysis::record_decentralized(k, alpha, &state.x, None, &suite));
            row_idx = Some(records.len() - 1);
        }
        if opts.record_snapshots && k % opts.snapshot_stride == 0 {
            snapshots.push((k, state.x.clone()));
        }
        state.x.col_mean(&mut xbar_prev);
        let step = match method {
            Method::GtDsgd => gt_dsgd_step(&mut state, w, oracle, alpha, &mut scratch),
            Method::Dsgd => dsgd_step(&mut state, w, oracle, alpha, &mut scratch),
            Method::Centralized => unreachable!(),
        };
        match step {
            Ok(()) => {}
            Err(Error::Diverged { k }) => {
                diverged = Some(k);
                break;
            }
            Err(e) => return Err(e),
        }
        // g_prev now holds this iteration's draws
        state.g_prev.col_mean(&mut gbar);
        if tracked {
            state.y.col_mean(&mut ybar);
            let id_err = ybar
                .iter()
                .zip(&gbar)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0_f64, f64::max);
            tracking_identity_max = tracking_identity_max.max(id_err);
            if let Some(idx) = row_idx {
                records[idx].tracking_err = Some(state.y.deviation_sq() / n as f64);
            }
        }
        state.x.col_mean(&mut xbar);
        let dyn_err = xbar
            .iter()
            .zip(&xbar_prev)
            .zip(&gbar)
            .map(|((a, xp), g)| (a - (xp - alpha * g)).abs())
            .fold(0.0_f64, f64::max);
        mean_dynamics_max = mean_dynamics_max.max(dyn_err);
        left_operating_box |= box_violated(&state.x, suite.operating_box());
    }
    if diverged.is_none() && records.last().map(|r| r.k) != Some(state.k) {
        records.push(analysis::record_decentralized(
            state.k,
            schedule.value(state.k),
            &state.x,
            None,
            &suite,
        ));
    }
    if opts.record_snapshots && snapshots.last().map(|s| s.0) != Some(state.k) {
        snapshots.push((state.k, state.x.clone()));
    }
    Ok(Trajectory {
        method,
        n,
        p,
        lambda: Some(w.lambda()),
        schedule: *schedule,
        records,
        snapshots,
        tracking_identity_max,
        mean_dynamics_max,
        diverged,
        left_operating_box,
    })
}

fn run_centralized(
    oracle: &mut GradientOracle,
    schedule: &StepSchedule,
    x0: &[f64],
    opts: &RunOptions,
    batch: usize,
) -> Result<Trajectory> {
    let suite = oracle.suite().clone();
    let mut x = x0.to_vec();
    let mut records = Vec::new();
    let mut snapshots = Vec::new();
    let mut diverged = None;
    let mut k = 0u64;
    while k < opts.iters {
        let alpha = schedule.value(k);
        if k % opts.metric_stride == 0 {
            records.push(analysis::record_centralized(k, alpha, &x, &suite));
        }
        if opts.record_snapshots && k % opts.snapshot_stride == 0 {
            snapshots.push((k, Mat::from_broadcast_row(1, &x)));
        }
        match centralized_sgd_step(&mut x, oracle, alpha, batch, k) {
            Ok(_) => k += 1,
            Err(Error::Diverged { k: dk }) => {
                diverged = Some(dk);
                break;
            }
            Err(e) => return Err(e),
        }
    }
    if diverged.is_none() && records.last().map(|r| r.k) != Some(k) {
        records.push(analysis::record_centralized(k, schedule.value(k), &x, &suite));
    }
    if opts.record_snapshots && snapshots.last().map(|s| s.0) != Some(k) {
        snapshots.push((k, Mat::from_broadcast_row(1, &x)));
    }
    Ok(Trajectory {
        method: Method::Centralized,
        n: 1,
        p: x.len(),
        lambda: None,
        schedule: *schedule,
        records,
        snapshots,
        tracking_identity_max: 0.0,
        mean_dynamics_max: 0.0,
        diverged,
        left_operating_box: false,
    })
}
