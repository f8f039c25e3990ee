//! Acceptance suite: every criterion below runs at its stated tolerance and
//! prints one `ACCEPTANCE <id> <PASS|FAIL>` line (visible with
//! `cargo test --test acceptance -- --nocapture`). Assertions enforce the
//! verdicts, so `cargo test` fails if any criterion regresses.

use std::sync::Arc;

use gtsim::algorithms::{run, Method, RunOptions, StepSchedule};
use gtsim::analysis::{
    self, lemma12_max_step, lemma_constants, lti_matrices, max_stable_step_ncvx,
    max_stable_step_pl, rate_fit, theorem1_bound, theorem2_steady_state, transient_time_ncvx,
    BoundInputs, MetricsRecord, TrialAverager,
};
use gtsim::harness::run_trials_parallel;
use gtsim::linalg::Mat;
use gtsim::objectives::{
    ncvx_logistic_suite, pl_synthetic_suite, quadratic_suite,
    synthetic_classification_partition, ObjectiveSuite, PartitionStrategy,
};
use gtsim::oracles::{gaussian_oracle, sampling_oracle, GradientOracle};
use gtsim::topology::{
    build_complete_graph, build_exponential_graph, build_geometric_graph, build_grid_graph,
    default_geometric_radius, equal_weights, lazy_metropolis_weights, metropolis_weights,
    validate_weight_matrix, WeightMatrix,
};

const THREADS: usize = 8;
const CHUNK: u64 = 8;

fn verdict(id: &str, pass: bool, name: &str, detail: &str) {
    println!("ACCEPTANCE {id} {} {name}: {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "criterion {id} failed: {name}: {detail}");
}

fn w_exp16() -> WeightMatrix {
    equal_weights(&build_exponential_graph(16).unwrap()).unwrap()
}

fn w_complete16() -> WeightMatrix {
    equal_weights(&build_complete_graph(16).unwrap()).unwrap()
}

fn x0(p: usize) -> Vec<f64> {
    vec![0.5; p]
}

fn inputs_for(suite: &ObjectiveSuite, lambda: f64, nu_a_sq: f64) -> BoundInputs {
    let start = x0(suite.p());
    let fgap0 = suite.global_value(&start) - suite.f_star().unwrap_or(0.0);
    let grad0_sq = suite.stacked_grad_norm_sq(&Mat::from_broadcast_row(suite.n(), &start));
    BoundInputs {
        l: suite.l_smooth(),
        mu: suite.mu(),
        lambda,
        n: suite.n(),
        nu_a_sq,
        fgap0,
        grad0_sq,
    }
}

/// Ordered Monte Carlo execution with index-wise averaging and a per-trial
/// reduction, chunked to bound peak memory.
fn monte_carlo<R: Send>(
    trials: u64,
    run_one: impl Fn(u64) -> gtsim::algorithms::Trajectory + Sync,
    reduce: impl Fn(&gtsim::algorithms::Trajectory) -> R,
) -> (Vec<MetricsRecord>, Vec<R>, f64) {
    let mut avg = TrialAverager::new();
    let mut reductions = Vec::new();
    let mut worst_identity = 0.0_f64;
    let mut start = 0;
    while start < trials {
        let end = (start + CHUNK).min(trials);
        for traj in run_trials_parallel(start..end, THREADS, &run_one) {
            assert!(traj.diverged.is_none(), "unexpected divergence at trial chunk {start}");
            avg.fold(&traj.records).unwrap();
            worst_identity = worst_identity.max(traj.tracking_identity_max);
            reductions.push(reduce(&traj));
        }
        start = end;
    }
    (avg.mean(), reductions, worst_identity)
}

fn tail_mean(records: &[MetricsRecord], cutoff: u64, get: impl Fn(&MetricsRecord) -> f64) -> f64 {
    let vals: Vec<f64> = records.iter().filter(|r| r.k >= cutoff).map(|r| get(r)).collect();
    vals.iter().sum::<f64>() / vals.len() as f64
}

#[test]
fn criterion_01_tracking_identity_matrix() {
    let mut worst = 0.0_f64;
    let mut worst_dyn = 0.0_f64;
    for n in [16usize, 100] {
        let (w, spn) = if n == 16 {
            (w_exp16(), 200)
        } else {
            let g = build_geometric_graph(100, default_geometric_radius(100), 7).unwrap();
            (metropolis_weights(&g).unwrap(), 50)
        };
        let grid = metropolis_weights(&build_grid_graph(4, 4).unwrap()).unwrap();
        let topologies: Vec<&WeightMatrix> = if n == 16 { vec![&w, &grid] } else { vec![&w] };
        let part =
            synthetic_classification_partition(n, spn, 5, PartitionStrategy::Iid, 11).unwrap();
        let suites = [
            Arc::new(pl_synthetic_suite(n, 1.0).unwrap()),
            Arc::new(ncvx_logistic_suite(part, 1e-4).unwrap()),
        ];
        let schedules = [
            StepSchedule::Constant { alpha: 5e-4 },
            StepSchedule::PolyDecay { delta: 0.04, phi: 100.0, epsilon: 0.8 },
            StepSchedule::Harmonic { beta: 0.1, gamma: 100.0 },
        ];
        for wm in topologies {
            for suite in &suites {
                for sched in &schedules {
                    let oracle = gaussian_oracle(suite.clone(), &[0.5], 42, 0).unwrap();
                    let mut opts = RunOptions::new(10_000);
                    opts.metric_stride = 1_000;
                    let t = run(Method::GtDsgd, Some(wm), oracle, sched, &x0(suite.p()), &opts)
                        .unwrap();
                    assert!(t.diverged.is_none());
                    worst = worst.max(t.tracking_identity_max);
                    worst_dyn = worst_dyn.max(t.mean_dynamics_max);
                }
            }
        }
    }
    verdict(
        "1",
        worst <= 1e-10 && worst_dyn <= 1e-10,
        "tracking identity",
        &format!("max ||ybar-gbar||_inf = {worst:.3e}, max mean-dynamics residual = {worst_dyn:.3e} (tol 1e-10)"),
    );
}

#[test]
fn criterion_02_weight_matrix_contract() {
    let exp = w_exp16();
    let grid_lazy = lazy_metropolis_weights(&build_grid_graph(4, 4).unwrap()).unwrap();
    let geom = metropolis_weights(
        &build_geometric_graph(100, default_geometric_radius(100), 7).unwrap(),
    )
    .unwrap();
    let mut stochastic_ok = true;
    for w in [&exp, &grid_lazy, &geom] {
        let rep = validate_weight_matrix(w.n(), w.entries());
        stochastic_ok &= rep.pass && rep.row_sum_err <= 1e-12 && rep.col_sum_err <= 1e-12;
    }
    let exp_ok = (exp.lambda() - 0.6).abs() <= 0.02;
    let grid_ok = (grid_lazy.lambda() - 0.93).abs() <= 0.02;
    let geom_ok = geom.lambda() >= 0.95 && geom.lambda() < 1.0;
    verdict(
        "2",
        stochastic_ok && exp_ok && grid_ok && geom_ok,
        "weight-matrix contract",
        &format!(
            "doubly stochastic to 1e-12; lambda: exp16 = {:.4} (0.6 +/- 0.02), grid4x4 lazy metropolis = {:.4} (0.93 +/- 0.02), geometric100 = {:.4} (in [0.95, 1))",
            exp.lambda(),
            grid_lazy.lambda(),
            geom.lambda()
        ),
    );
}

#[test]
fn criterion_03_exact_gradient_linear_convergence() {
    let suite = Arc::new(pl_synthetic_suite(16, 0.1).unwrap());
    let w = w_exp16();
    let mu = suite.mu().unwrap();
    let abar = max_stable_step_pl(suite.l_smooth(), mu, w.lambda()).unwrap();
    let gap0 = suite.global_value(&x0(1));
    let rate = 1.0 - mu * abar / 2.0;
    let budget = 2 * ((1e-10_f64 / gap0).ln() / rate.ln()).ceil() as u64;
    let oracle = gaussian_oracle(suite, &[0.0], 42, 0).unwrap();
    let sched = StepSchedule::Constant { alpha: abar };
    let t = run(Method::GtDsgd, Some(&w), oracle, &sched, &x0(1), &RunOptions::new(budget)).unwrap();
    let hit = t
        .records
        .iter()
        .find(|r| r.opt_gap_mean.unwrap() <= 1e-10)
        .map(|r| r.k);
    let k_hit = hit.unwrap_or(u64::MAX);
    let gap_100 = t.records[100].opt_gap_mean.unwrap();
    let gap_hit = t.records[k_hit.min(budget) as usize].opt_gap_mean.unwrap().max(1e-300);
    let contraction = (gap_hit / gap_100).powf(1.0 / (k_hit.min(budget) - 100) as f64);
    let tol = rate + 0.05;
    verdict(
        "3",
        k_hit <= budget && contraction <= tol,
        "exact-gradient linear convergence",
        &format!(
            "gap <= 1e-10 at k = {k_hit} (budget {budget}); contraction after k=100 = {contraction:.6} <= {tol:.6}"
        ),
    );
}

#[test]
fn criterion_04_theorem1_bound() {
    let suite = Arc::new(pl_synthetic_suite(16, 0.1).unwrap());
    let w = w_exp16();
    let alpha = max_stable_step_ncvx(suite.l_smooth(), w.lambda()).unwrap() / 2.0;
    let iters = 10_000u64;
    let sched = StepSchedule::Constant { alpha };
    let suite2 = suite.clone();
    let wref = &w;
    let (_, avgs, _) = monte_carlo(
        20,
        move |trial| {
            let oracle = gaussian_oracle(suite2.clone(), &[0.5], 42, trial).unwrap();
            run(Method::GtDsgd, Some(wref), oracle, &sched, &x0(1), &RunOptions::new(iters)).unwrap()
        },
        |t| {
            let pre: Vec<f64> = t
                .records
                .iter()
                .filter(|r| r.k < iters)
                .map(|r| r.stationary_gap_avg)
                .collect();
            pre.iter().sum::<f64>() / pre.len() as f64
        },
    );
    let inputs = inputs_for(&suite, w.lambda(), 0.25);
    let bound = theorem1_bound(&inputs, alpha, iters).unwrap().total();
    let rep = analysis::bound_check_scalar("theorem1", &avgs, bound, "");
    verdict(
        "4",
        rep.pass,
        "theorem-1 bound satisfaction",
        &format!(
            "running-average stationary gap mean+2se = {:.4} <= bound {:.4} (20 trials)",
            rep.measured, rep.value
        ),
    );
}

#[test]
fn criterion_05_theorem2_steady_state_and_lemma16() {
    let suite = Arc::new(pl_synthetic_suite(16, 0.1).unwrap());
    let w = w_exp16();
    let mu = suite.mu().unwrap();
    let abar = max_stable_step_pl(suite.l_smooth(), mu, w.lambda()).unwrap();
    let iters = 40_000u64;
    let cutoff = (0.9 * iters as f64) as u64;
    let sched = StepSchedule::Constant { alpha: abar };
    let suite2 = suite.clone();
    let wref = &w;
    let (mean, tails, _) = monte_carlo(
        20,
        move |trial| {
            let oracle = gaussian_oracle(suite2.clone(), &[0.5], 42, trial).unwrap();
            run(Method::GtDsgd, Some(wref), oracle, &sched, &x0(1), &RunOptions::new(iters)).unwrap()
        },
        |t| {
            (
                tail_mean(&t.records, cutoff, |r| r.opt_gap_mean.unwrap()),
                tail_mean(&t.records, cutoff, |r| r.consensus_err.unwrap()),
            )
        },
    );
    let inputs = inputs_for(&suite, w.lambda(), 0.25);
    let ss = theorem2_steady_state(&inputs, abar).unwrap();
    let gaps: Vec<f64> = tails.iter().map(|t| t.0).collect();
    let cons: Vec<f64> = tails.iter().map(|t| t.1).collect();
    let rep_gap = analysis::bound_check_scalar("theorem2_ss", &gaps, ss.opt_gap_ss, "");
    let rep_cons = analysis::bound_check_scalar("theorem2_ss", &cons, ss.consensus_ss, "");
    verdict(
        "5",
        rep_gap.pass && rep_cons.pass,
        "theorem-2 steady state",
        &format!(
            "E[F(xbar)-F*] {:.3e} <= {:.3e}; E||x-Jx||^2/n {:.3e} <= {:.3e} (20 trials, last 10%)",
            rep_gap.measured, rep_gap.value, rep_cons.measured, rep_cons.value
        ),
    );

    // criterion 7 (constant-step part): uniform tracking bound
    let c = lemma_constants(&inputs).unwrap();
    let worst = mean
        .iter()
        .filter_map(|r| r.tracking_err.map(|v| v * 16.0))
        .fold(0.0_f64, f64::max);
    verdict(
        "7a",
        worst <= c.y_hat,
        "lemma-16 uniform tracking bound (constant step)",
        &format!("sup_k n*tracking_err = {worst:.4} <= y_hat = {:.4}", c.y_hat),
    );
}

struct HarmonicSetup {
    label: &'static str,
    suite: Arc<ObjectiveSuite>,
    w: WeightMatrix,
    beta: f64,
    gamma: f64,
    nu_a_sq: f64,
}

fn harmonic_setups() -> Vec<HarmonicSetup> {
    let quad = Arc::new(quadratic_suite(16, 1.0).unwrap());
    let wq = w_exp16();
    let mu_q = quad.mu().unwrap();
    let abar_q = max_stable_step_pl(quad.l_smooth(), mu_q, wq.lambda()).unwrap();
    let beta_q = 6.0 / mu_q;
    let gamma_q = (beta_q / abar_q).max(8.0 / (1.0 - wq.lambda() * wq.lambda()));

    let pl = Arc::new(pl_synthetic_suite(16, 0.1).unwrap());
    let wc = w_complete16();
    let mu_p = pl.mu().unwrap();
    let abar_p = max_stable_step_pl(pl.l_smooth(), mu_p, wc.lambda()).unwrap();
    let beta_p = 6.0 / mu_p;
    let gamma_p = (beta_p / abar_p).max(8.0 / (1.0 - wc.lambda() * wc.lambda()));

    vec![
        HarmonicSetup { label: "quadratic/exp16", suite: quad, w: wq, beta: beta_q, gamma: gamma_q, nu_a_sq: 0.25 },
        HarmonicSetup { label: "pl_synthetic/complete16", suite: pl, w: wc, beta: beta_p, gamma: gamma_p, nu_a_sq: 0.25 },
    ]
}

#[test]
fn criterion_06a_harmonic_rate_and_07_decay_bounds() {
    let iters = 100_000u64;
    for setup in harmonic_setups() {
        let sched = StepSchedule::Harmonic { beta: setup.beta, gamma: setup.gamma };
        let suite = setup.suite.clone();
        let wref = &setup.w;
        let (mean, _, _) = monte_carlo(
            50,
            move |trial| {
                let oracle =
                    gaussian_oracle(suite.clone(), &[0.5], 42, trial).unwrap();
                run(Method::GtDsgd, Some(wref), oracle, &sched, &x0(1), &RunOptions::new(iters))
                    .unwrap()
            },
            |_| (),
        );
        let ks: Vec<u64> = mean.iter().map(|r| r.k).collect();
        let gaps: Vec<f64> = mean.iter().map(|r| r.opt_gap_nodes.unwrap()).collect();
        let slope = rate_fit(&ks, &gaps, 1_000, 100_000).unwrap();
        verdict(
            "6a",
            (slope + 1.0).abs() <= 0.2,
            "asymptotic 1/k rate (harmonic, corollary-2 parameters)",
            &format!("{}: trial-mean opt-gap slope = {slope:.3} (target -1 +/- 0.2, 50 trials)", setup.label),
        );

        // criterion 7 (decaying-step part): lemma 16 + lemma 18
        let inputs = inputs_for(&setup.suite, setup.w.lambda(), setup.nu_a_sq);
        let c = lemma_constants(&inputs).unwrap();
        let worst_tracking = mean
            .iter()
            .filter_map(|r| r.tracking_err.map(|v| v * 16.0))
            .fold(0.0_f64, f64::max);
        let lemma18_ok = mean.iter().all(|r| {
            let b = c.x_hat * setup.beta * setup.beta
                / ((r.k as f64 + setup.gamma) * (r.k as f64 + setup.gamma));
            r.consensus_err.unwrap() * 16.0 <= b
        });
        verdict(
            "7b",
            worst_tracking <= c.y_hat && lemma18_ok,
            "lemma-16/18 constants on harmonic runs",
            &format!(
                "{}: sup_k n*tracking = {worst_tracking:.4} <= y_hat = {:.4}; n*consensus <= x_hat b^2/(k+g)^2 at all k: {lemma18_ok}",
                setup.label, c.y_hat
            ),
        );
    }
}

#[test]
fn criterion_06b_per_path_polynomial_decay() {
    let suite = Arc::new(quadratic_suite(16, 1.0).unwrap());
    let w = w_exp16();
    let mu = suite.mu().unwrap();
    let abar = max_stable_step_pl(suite.l_smooth(), mu, w.lambda()).unwrap();
    let delta = 6.0 / mu;
    let iters = 100_000u64;
    for epsilon in [0.6, 0.8] {
        let phi = (delta / abar).powf(1.0 / epsilon).max(4.0 / (1.0 - w.lambda() * w.lambda()));
        let sched = StepSchedule::PolyDecay { delta, phi, epsilon };
        let suite2 = suite.clone();
        let wref = &w;
        let (_, slopes, _) = monte_carlo(
            50,
            move |trial| {
                let oracle = gaussian_oracle(suite2.clone(), &[0.5], 42, trial).unwrap();
                run(Method::GtDsgd, Some(wref), oracle, &sched, &x0(1), &RunOptions::new(iters))
                    .unwrap()
            },
            |t| {
                let ks: Vec<u64> = t.records.iter().map(|r| r.k).collect();
                let gaps: Vec<f64> =
                    t.records.iter().map(|r| r.opt_gap_nodes.unwrap()).collect();
                rate_fit(&ks, &gaps, 1_000, 100_000).unwrap()
            },
        );
        let threshold = -(2.0 * epsilon - 1.0) + 0.2;
        let passing = slopes.iter().filter(|s| **s <= threshold).count();
        verdict(
            "6b",
            passing >= 45,
            "per-path sublinear decay (polynomial steps)",
            &format!(
                "epsilon = {epsilon}: {passing}/50 paths with slope <= {threshold:.2} (worst {:.3})",
                slopes.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
            ),
        );
    }
}

#[test]
fn criterion_08_spectral_radius_conditions() {
    let mut ok = true;
    let mut detail = String::new();
    for &lambda in &[0.0, 0.3, 0.6, 0.9, 0.99] {
        for &kappa in &[1.0, 10.0, 100.0] {
            let l = 1.0;
            let mu = l / kappa;
            let inputs = BoundInputs { l, mu: Some(mu), lambda, n: 16, nu_a_sq: 0.25, fgap0: 1.0, grad0_sq: 16.0 };
            let a12 = lemma12_max_step(l, lambda);
            let alphas_g: Vec<f64> = if a12.is_finite() {
                vec![0.25 * a12, 0.5 * a12, a12]
            } else {
                vec![0.1, 1.0, 10.0]
            };
            for a in alphas_g {
                let sys = lti_matrices(&inputs, a).unwrap();
                if !(sys.g_contractive_claimed && sys.rho_g < 1.0) {
                    ok = false;
                    detail = format!("rho(G) = {} at lambda {lambda}, alpha {a}", sys.rho_g);
                }
            }
            let abar = max_stable_step_pl(l, mu, lambda).unwrap();
            for f in [0.2, 0.4, 0.6, 0.8, 1.0] {
                let a = f * abar;
                let sys = lti_matrices(&inputs, a).unwrap();
                let rho = sys.rho_h.unwrap();
                if !(sys.h_contractive_claimed && rho <= 1.0 - mu * a / 2.0 + 1e-9) {
                    ok = false;
                    detail = format!(
                        "rho(H) = {rho} > 1 - mu a/2 = {} at lambda {lambda}, kappa {kappa}, alpha {a}",
                        1.0 - mu * a / 2.0
                    );
                }
            }
        }
    }
    if detail.is_empty() {
        detail = "rho(G) < 1 on the claimed range; rho(H) <= 1 - mu*alpha/2 + 1e-9 for alpha <= alpha_bar, over lambda x kappa grid".into();
    }
    verdict("8", ok, "spectral-radius conditions", &detail);
}

#[test]
fn criterion_09_heterogeneity_separation() {
    let suite = Arc::new(pl_synthetic_suite(16, 10.0).unwrap());
    let w = w_exp16();
    let sched = StepSchedule::Constant { alpha: 1e-3 };
    let iters = 20_000u64;
    let cutoff = (0.9 * iters as f64) as u64;
    let run_method = |method: Method| {
        let suite2 = suite.clone();
        let wref = &w;
        let sched = sched;
        let (_, tails, _) = monte_carlo(
            20,
            move |trial| {
                let oracle = gaussian_oracle(suite2.clone(), &[0.5], 42, trial).unwrap();
                run(method, Some(wref), oracle, &sched, &x0(1), &RunOptions::new(iters)).unwrap()
            },
            |t| tail_mean(&t.records, cutoff, |r| r.opt_gap_nodes.unwrap()),
        );
        tails.iter().sum::<f64>() / tails.len() as f64
    };
    let gt = run_method(Method::GtDsgd);
    let ds = run_method(Method::Dsgd);
    verdict(
        "9",
        ds >= 2.0 * gt,
        "heterogeneity separation",
        &format!("steady-state node gap: tracked {gt:.3e} vs untracked {ds:.3e} ({}x, need >= 2x)", ds / gt),
    );
}

#[test]
fn criterion_10_network_independence() {
    let n = 16;
    let part = synthetic_classification_partition(n, 200, 5, PartitionStrategy::Iid, 11).unwrap();
    let suite = Arc::new(ncvx_logistic_suite(part, 1e-4).unwrap());
    let w_exp = w_exp16();
    let w_grid = metropolis_weights(&build_grid_graph(4, 4).unwrap()).unwrap();
    let l = suite.l_smooth();
    let mut iters = 0.0_f64;
    for w in [&w_exp, &w_grid] {
        let inputs = BoundInputs {
            l,
            mu: None,
            lambda: w.lambda(),
            n,
            nu_a_sq: 0.0,
            fgap0: 0.0,
            grad0_sq: 0.0,
        };
        iters = iters.max(transient_time_ncvx(&inputs).unwrap().explicit_precondition);
    }
    let iters = iters.ceil() as u64;
    let alpha = (n as f64 / iters as f64).sqrt();
    let sched = StepSchedule::Constant { alpha };
    let start = vec![0.0; 5];
    let trials = 5;
    let final_loss = |method: Method, w: Option<&WeightMatrix>| -> f64 {
        let suite2 = suite.clone();
        let start = start.clone();
        let (_, finals, _) = monte_carlo(
            trials,
            move |trial| {
                let oracle = sampling_oracle(suite2.clone(), 1, 42, trial, &start).unwrap();
                let mut opts = RunOptions::new(iters);
                opts.metric_stride = 1_000;
                run(method, w, oracle, &sched, &start, &opts).unwrap()
            },
            |t| t.records.last().unwrap().loss,
        );
        finals.iter().sum::<f64>() / finals.len() as f64
    };
    let le = final_loss(Method::GtDsgd, Some(&w_exp));
    let lg = final_loss(Method::GtDsgd, Some(&w_grid));
    let lc = final_loss(Method::Centralized, None);
    let cross = (le - lg).abs() / le.max(lg);
    let ve = (le - lc).abs() / lc;
    let vg = (lg - lc).abs() / lc;
    verdict(
        "10",
        cross <= 0.05 && ve <= 0.10 && vg <= 0.10,
        "network independence",
        &format!(
            "K = {iters}, alpha = {alpha:.4}: losses exp {le:.5} / grid {lg:.5} / centralized {lc:.5}; cross {:.2}% (<= 5%), vs centralized {:.2}% / {:.2}% (<= 10%)",
            100.0 * cross,
            100.0 * ve,
            100.0 * vg
        ),
    );
}

#[test]
fn criterion_11_single_node_reductions() {
    let suite = Arc::new(quadratic_suite(1, 1.0).unwrap());
    let w = WeightMatrix::from_entries(1, vec![1.0]).unwrap();
    let sched = StepSchedule::Constant { alpha: 0.05 };
    let opts = RunOptions::new(10_000);
    let mk = || -> GradientOracle { gaussian_oracle(suite.clone(), &[0.5], 42, 0).unwrap() };
    let gt = run(Method::GtDsgd, Some(&w), mk(), &sched, &[1.0], &opts).unwrap();
    let ds = run(Method::Dsgd, Some(&w), mk(), &sched, &[1.0], &opts).unwrap();
    let ce = run(Method::Centralized, None, mk(), &sched, &[1.0], &opts).unwrap();
    let identical = gt
        .records
        .iter()
        .zip(&ds.records)
        .zip(&ce.records)
        .all(|((a, b), c)| {
            a.loss.to_bits() == b.loss.to_bits() && a.loss.to_bits() == c.loss.to_bits()
        });
    verdict(
        "11",
        identical && gt.records.len() == 10_001,
        "single-node reductions",
        "tracked, untracked, and centralized(batch=1) iterate sequences bit-identical over 10^4 iterations",
    );
}
