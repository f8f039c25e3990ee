//! Measured metrics and closed-form theory: per-iteration records, the
//! non-asymptotic bound evaluators, stability ranges, the small comparison
//! systems with their spectral radii, transient-time estimates, and the
//! rate fits and bound checks that tie measurement back to theory.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, KahanSum, Mat};
use crate::objectives::ObjectiveSuite;

/// Per-iteration measured quantities. `None` fields were not defined for
/// the run (no `F*`, no network, or no tracker) -- absent, never zero.
#[derive(Debug, Clone, Serialize)]
pub struct MetricsRecord {
    pub k: u64,
    pub alpha_k: f64,
    /// `(1/n) sum_i F(x_k^i)`.
    pub loss: f64,
    /// `F(xbar_k) - F*`.
    pub opt_gap_mean: Option<f64>,
    /// `(1/n) sum_i (F(x_k^i) - F*)`.
    pub opt_gap_nodes: Option<f64>,
    /// `(1/n) sum_i ||grad F(x_k^i)||^2`.
    pub stationary_gap_avg: f64,
    /// `||x_k - J x_k||^2 / n`.
    pub consensus_err: Option<f64>,
    /// `||y_{k+1} - J y_{k+1}||^2 / n`.
    pub tracking_err: Option<f64>,
}

/// Metrics for a stacked decentralized state (rows = nodes). `y_next` is the
/// tracker after the step at `k`, when one exists.
pub fn record_decentralized(
    k: u64,
    alpha_k: f64,
    x: &Mat,
    y_next: Option<&Mat>,
    suite: &ObjectiveSuite,
) -> MetricsRecord {
    let n = x.rows();
    let mut grad = vec![0.0; x.cols()];
    let mut loss_acc = 0.0;
    let mut stat_acc = 0.0;
    for i in 0..n {
        let xi = x.row(i);
        loss_acc += suite.global_value(xi);
        suite.global_grad(xi, &mut grad);
        stat_acc += grad.iter().map(|g| g * g).sum::<f64>();
    }
    let loss = loss_acc / n as f64;
    let stationary_gap_avg = stat_acc / n as f64;
    let mut xbar = vec![0.0; x.cols()];
    x.col_mean(&mut xbar);
    let (opt_gap_mean, opt_gap_nodes) = match suite.f_star() {
        Some(fs) => (Some(suite.global_value(&xbar) - fs), Some(loss - fs)),
        None => (None, None),
    };
    MetricsRecord {
        k,
        alpha_k,
        loss,
        opt_gap_mean,
        opt_gap_nodes,
        stationary_gap_avg,
        consensus_err: Some(x.deviation_sq() / n as f64),
        tracking_err: y_next.map(|y| y.deviation_sq() / n as f64),
    }
}

/// Metrics for a centralized iterate (one shared point, no network fields).
pub fn record_centralized(k: u64, alpha_k: f64, x: &[f64], suite: &ObjectiveSuite) -> MetricsRecord {
    let mut grad = vec![0.0; x.len()];
    suite.global_grad(x, &mut grad);
    let loss = suite.global_value(x);
    let gap = suite.f_star().map(|fs| loss - fs);
    MetricsRecord {
        k,
        alpha_k,
        loss,
        opt_gap_mean: gap,
        opt_gap_nodes: gap,
        stationary_gap_avg: grad.iter().map(|g| g * g).sum(),
        consensus_err: None,
        tracking_err: None,
    }
}

/// Inputs shared by the bound evaluators. All values refer to the run being
/// checked: smoothness L, PL constant mu (when claimed), network lambda,
/// node count, average oracle variance, initial optimality gap of the mean
/// iterate, and the stacked initial gradient norm `||∇f_0||^2`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BoundInputs {
    pub l: f64,
    pub mu: Option<f64>,
    pub lambda: f64,
    pub n: usize,
    pub nu_a_sq: f64,
    pub fgap0: f64,
    pub grad0_sq: f64,
}

impl BoundInputs {
    fn mu(&self) -> Result<f64> {
        self.mu.ok_or_else(|| Error::Analysis("this bound needs a PL constant mu".into()))
    }

    pub fn kappa(&self) -> Result<f64> {
        Ok(self.l / self.mu()?)
    }

    fn check(&self) -> Result<()> {
        if !(self.lambda >= 0.0 && self.lambda < 1.0) {
            return Err(Error::Analysis(format!("lambda must lie in [0,1), got {}", self.lambda)));
        }
        if self.l <= 0.0 {
            return Err(Error::Analysis("L must be positive".into()));
        }
        if let Some(mu) = self.mu {
            if mu <= 0.0 || mu > self.l {
                return Err(Error::Analysis(format!("need 0 < mu <= L, got mu = {mu}, L = {}", self.l)));
            }
        }
        if self.nu_a_sq < 0.0 || self.fgap0 < 0.0 || self.grad0_sq < 0.0 {
            return Err(Error::Analysis("variance and gap inputs must be nonnegative".into()));
        }
        Ok(())
    }
}

/// Largest constant step size claimed for the smooth non-convex result:
/// `min{1, (1-l^2)/(12 l), (1-l^2)^2 / (4 sqrt(6) l^2)} / (2L)`,
/// with the lambda terms dropped at lambda = 0.
pub fn max_stable_step_ncvx(l: f64, lambda: f64) -> Result<f64> {
    if !(lambda >= 0.0 && lambda < 1.0) {
        return Err(Error::Analysis(format!("lambda must lie in [0,1), got {lambda}")));
    }
    if l <= 0.0 {
        return Err(Error::Analysis("L must be positive".into()));
    }
    let q = 1.0 - lambda * lambda;
    let mut m = 1.0_f64;
    if lambda > 0.0 {
        m = m.min(q / (12.0 * lambda));
        m = m.min(q * q / (4.0 * 6.0_f64.sqrt() * lambda * lambda));
    }
    Ok(m / (2.0 * l))
}

/// Largest constant step size claimed under the PL condition:
/// `min{1/(2L), (1-l^2)^2/(42 l^2 L), (1-l^2)/(24 l L k^{1/4}), (1-l^2)/(2 mu)}`.
pub fn max_stable_step_pl(l: f64, mu: f64, lambda: f64) -> Result<f64> {
    if !(lambda >= 0.0 && lambda < 1.0) {
        return Err(Error::Analysis(format!("lambda must lie in [0,1), got {lambda}")));
    }
    if !(mu > 0.0 && mu <= l) {
        return Err(Error::Analysis(format!("need 0 < mu <= L, got mu = {mu}, L = {l}")));
    }
    let q = 1.0 - lambda * lambda;
    let kappa = l / mu;
    let mut m = 1.0 / (2.0 * l);
    if lambda > 0.0 {
        m = m.min(q * q / (42.0 * lambda * lambda * l));
        m = m.min(q / (24.0 * lambda * l * kappa.powf(0.25)));
    }
    Ok(m.min(q / (2.0 * mu)))
}

/// Step range on which `rho(G) < 1` is claimed:
/// `min{(1-l^2)/(24 l), (1-l^2)^2/(15 l^2)} / L` (unbounded at lambda = 0).
pub fn lemma12_max_step(l: f64, lambda: f64) -> f64 {
    if lambda == 0.0 {
        return f64::INFINITY;
    }
    let q = 1.0 - lambda * lambda;
    (q / (24.0 * lambda)).min(q * q / (15.0 * lambda * lambda)) / l
}

/// Finite-horizon stationary-gap bound, split into the centralized-matching
/// terms and the network terms.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Theorem1Bound {
    pub opt_term: f64,
    pub variance_term: f64,
    pub network_variance_term: f64,
    pub network_init_term: f64,
}

impl Theorem1Bound {
    pub fn centralized(&self) -> f64 {
        self.opt_term + self.variance_term
    }

    pub fn network(&self) -> f64 {
        self.network_variance_term + self.network_init_term
    }

    pub fn total(&self) -> f64 {
        self.centralized() + self.network()
    }
}

/// Bound on the K-iteration running average of the mean-squared stationary
/// gap under a constant step `alpha` within [`max_stable_step_ncvx`].
pub fn theorem1_bound(inputs: &BoundInputs, alpha: f64, big_k: u64) -> Result<Theorem1Bound> {
    inputs.check()?;
    if big_k < 2 {
        return Err(Error::Analysis("theorem1_bound needs K >= 2".into()));
    }
    let max = max_stable_step_ncvx(inputs.l, inputs.lambda)?;
    if !(alpha > 0.0 && alpha <= max) {
        return Err(Error::StepOutOfRange { alpha, max });
    }
    let n = inputs.n as f64;
    let k = big_k as f64;
    let l = inputs.l;
    let lam = inputs.lambda;
    let q = 1.0 - lam * lam;
    Ok(Theorem1Bound {
        opt_term: 4.0 * inputs.fgap0 / (alpha * k),
        variance_term: 2.0 * alpha * inputs.nu_a_sq * l / n,
        network_variance_term: 448.0 * alpha * alpha * l * l * lam * lam * inputs.nu_a_sq / (q * q * q),
        network_init_term: 64.0 * alpha * alpha * l * l * lam.powi(4) / (q * q * q * k)
            * (inputs.grad0_sq / n),
    })
}

/// Steady-state errors under the PL condition with a constant step.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Theorem2SteadyState {
    /// limsup of `E ||x_k - J x_k||^2 / n`.
    pub consensus_ss: f64,
    /// limsup of `E [F(xbar_k) - F*]`.
    pub opt_gap_ss: f64,
}

pub fn theorem2_steady_state(inputs: &BoundInputs, alpha: f64) -> Result<Theorem2SteadyState> {
    inputs.check()?;
    let mu = inputs.mu()?;
    let max = max_stable_step_pl(inputs.l, mu, inputs.lambda)?;
    if !(alpha > 0.0 && alpha <= max) {
        return Err(Error::StepOutOfRange { alpha, max });
    }
    let n = inputs.n as f64;
    let l = inputs.l;
    let kappa = l / mu;
    let lam = inputs.lambda;
    let q = 1.0 - lam * lam;
    let nu = inputs.nu_a_sq;
    Ok(Theorem2SteadyState {
        consensus_ss: 288.0 * lam.powi(4) * alpha.powi(5) * l.powi(3) * kappa * nu / (n * q.powi(4))
            + 144.0 * lam * lam * alpha * alpha * nu / q.powi(3),
        opt_gap_ss: 1.5 * alpha * kappa * nu / n
            + 72.0 * lam * lam * alpha * alpha * kappa * l * nu / q.powi(3),
    })
}

/// The uniform tracking-error bound `y_hat` and the consensus decay
/// constant `x_hat = 8 l^2 y_hat / (1-l^2)^2`, both evaluated at the
/// maximal PL step.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct LemmaConstants {
    /// Uniform bound on `E ||y_k - J y_k||^2`.
    pub y_hat: f64,
    /// Constant in `E ||x_k - J x_k||^2 <= x_hat beta^2 / (k + gamma)^2`.
    pub x_hat: f64,
}

pub fn lemma_constants(inputs: &BoundInputs) -> Result<LemmaConstants> {
    inputs.check()?;
    let mu = inputs.mu()?;
    let abar = max_stable_step_pl(inputs.l, mu, inputs.lambda)?;
    let n = inputs.n as f64;
    let l = inputs.l;
    let kappa = l / mu;
    let lam = inputs.lambda;
    let q = 1.0 - lam * lam;
    let y_hat = 30.0 * lam * lam * abar.powi(3) * l.powi(3) * kappa * inputs.nu_a_sq / (q * q)
        + 60.0 * n * lam * lam * abar * abar * l.powi(3) * inputs.fgap0 / (q * q)
        + 16.0 * n * inputs.nu_a_sq / q
        + lam * lam * inputs.grad0_sq;
    Ok(LemmaConstants { y_hat, x_hat: 8.0 * lam * lam * y_hat / (q * q) })
}

/// Non-asymptotic optimality-gap bound for the harmonic schedule
/// `alpha_k = beta / (k + gamma)`.
pub fn theorem4_bound(inputs: &BoundInputs, beta: f64, gamma: f64, k: u64) -> Result<f64> {
    inputs.check()?;
    let mu = inputs.mu()?;
    let abar = max_stable_step_pl(inputs.l, mu, inputs.lambda)?;
    if !(beta > 2.0 / mu) {
        return Err(Error::Schedule(format!("theorem4 needs beta > 2/mu = {}", 2.0 / mu)));
    }
    let gamma_min = (beta / abar).max(8.0 / (1.0 - inputs.lambda * inputs.lambda));
    if gamma < gamma_min {
        return Err(Error::Schedule(format!("theorem4 needs gamma >= {gamma_min}, got {gamma}")));
    }
    let n = inputs.n as f64;
    let l = inputs.l;
    let kf = k as f64;
    let x_hat = lemma_constants(inputs)?.x_hat;
    let noise = 2.0 * l * inputs.nu_a_sq * beta * beta / (n * (mu * beta - 1.0) * (kf + gamma));
    let transient = 2.0 * inputs.fgap0 / (kf / gamma + 1.0).powf(mu * beta);
    let network = 3.0 * l * l * x_hat * beta.powi(3) / (n * (mu * beta - 2.0) * (kf + gamma) * (kf + gamma));
    Ok(noise + transient + network)
}

/// The two comparison systems: the 2x2 consensus/tracking matrix `G` and the
/// 3x3 PL matrix `H_k`, with spectral radii from the shared power iteration.
/// Out-of-range steps still return the matrices; only the validity flags and
/// claimed radii change.
#[derive(Debug, Clone, Serialize)]
pub struct LtiSystem {
    pub g: [[f64; 2]; 2],
    pub rho_g: f64,
    /// `alpha` within the range where the G recursion is established.
    pub g_valid: bool,
    /// `alpha` within the range where `rho(G) < 1` is claimed.
    pub g_contractive_claimed: bool,
    pub h: Option<[[f64; 3]; 3]>,
    pub rho_h: Option<f64>,
    pub h_valid: bool,
    /// `alpha <= abar`, where `rho(H) <= 1 - mu alpha / 2` is claimed.
    pub h_contractive_claimed: bool,
}

pub fn lti_matrices(inputs: &BoundInputs, alpha: f64) -> Result<LtiSystem> {
    inputs.check()?;
    if alpha <= 0.0 {
        return Err(Error::Analysis("alpha must be positive".into()));
    }
    let l = inputs.l;
    let lam = inputs.lambda;
    let q = 1.0 - lam * lam;
    let half = (1.0 + lam * lam) / 2.0;
    let g = [
        [half, 2.0 * alpha * alpha * lam * lam * l * l / q],
        [24.0 * lam * lam / q, half],
    ];
    let rho_g = linalg::spectral_radius(&[g[0][0], g[0][1], g[1][0], g[1][1]], 2);
    let g_valid = lam == 0.0 || alpha <= q / (24.0 * lam * l);
    let g_contractive_claimed = alpha <= lemma12_max_step(l, lam);
    let (h, rho_h, h_valid, h_contractive_claimed) = match inputs.mu {
        Some(mu) => {
            let h = [
                [half, 0.0, 2.0 * alpha * alpha * lam * lam * l * l / q],
                [alpha * l / 2.0, 1.0 - mu * alpha, 0.0],
                [27.0 * lam * lam / q, 24.0 * lam * lam * alpha * alpha * l * l / q, half],
            ];
            let flat: Vec<f64> = h.iter().flatten().copied().collect();
            let rho = linalg::spectral_radius(&flat, 3);
            let valid = alpha <= max_stable_step_ncvx(l, lam)?;
            let claimed = alpha <= max_stable_step_pl(l, mu, lam)?;
            (Some(h), Some(rho), valid, claimed)
        }
        None => (None, None, false, false),
    };
    Ok(LtiSystem { g, rho_g, g_valid, g_contractive_claimed, h, rho_h, h_valid, h_contractive_claimed })
}

/// Transient-time estimate for the non-convex rate: the order-level count
/// (unit constant) plus the exact finite-horizon precondition on `K`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TransientNcvx {
    /// `n^3 lambda^4 L^2 / (1-lambda)^6`, an order estimate (constant = 1).
    pub order_estimate: f64,
    /// `4 n L^2 max{1, 144 l^2/(1-l^2)^2, 96 l^4/(1-l^2)^4}`, exact.
    pub explicit_precondition: f64,
}

pub fn transient_time_ncvx(inputs: &BoundInputs) -> Result<TransientNcvx> {
    inputs.check()?;
    let n = inputs.n as f64;
    let l = inputs.l;
    let lam = inputs.lambda;
    let q = 1.0 - lam * lam;
    let order_estimate = n.powi(3) * lam.powi(4) * l * l / (1.0 - lam).powi(6);
    let max_term = 1.0_f64
        .max(144.0 * lam * lam / (q * q))
        .max(96.0 * lam.powi(4) / q.powi(4));
    Ok(TransientNcvx { order_estimate, explicit_precondition: 4.0 * n * l * l * max_term })
}

/// Transient-time estimate for the PL 1/k rate (unit constants). The last
/// term needs `nu_a^2 > 0`; otherwise it is omitted and flagged.
#[derive(Debug, Clone, Serialize)]
pub struct TransientPl {
    pub terms: Vec<f64>,
    pub total: f64,
    pub variance_term_omitted: bool,
}

pub fn transient_time_pl(inputs: &BoundInputs) -> Result<TransientPl> {
    inputs.check()?;
    let kappa = inputs.kappa()?;
    let n = inputs.n as f64;
    let lam = inputs.lambda;
    let g = 1.0 - lam;
    let mut terms = vec![
        lam * lam * n * kappa / g.powi(3),
        lam * kappa.powf(1.25) / g,
        kappa,
        lam.powf(1.5) * kappa.powf(11.0 / 8.0) / g.powf(1.5),
        kappa.powf(-0.5) / g.powf(1.5),
    ];
    let variance_term_omitted = inputs.nu_a_sq == 0.0;
    if !variance_term_omitted {
        terms.push(lam * lam * n * kappa.sqrt() * inputs.l * inputs.fgap0 / (g * g * inputs.nu_a_sq));
    }
    Ok(TransientPl { total: terms.iter().sum(), terms, variance_term_omitted })
}

/// Least-squares slope of `log(metric)` against `log(k)` over the window
/// `[k_lo, k_hi]` (requires `k_hi >= 10 k_lo`). Nonpositive values inside
/// the window are dropped; if fewer than 10 points survive, fails.
pub fn rate_fit(ks: &[u64], vals: &[f64], k_lo: u64, k_hi: u64) -> Result<f64> {
    if k_lo == 0 || k_hi < 10 * k_lo {
        return Err(Error::Analysis("rate fit window needs k_hi >= 10 k_lo >= 10".into()));
    }
    if ks.len() != vals.len() {
        return Err(Error::Analysis("ks and vals length mismatch".into()));
    }
    let pts: Vec<(f64, f64)> = ks
        .iter()
        .zip(vals)
        .filter(|(k, v)| **k >= k_lo && **k <= k_hi && **v > 0.0)
        .map(|(k, v)| ((*k as f64).ln(), v.ln()))
        .collect();
    if pts.len() < 10 {
        return Err(Error::Analysis(format!(
            "only {} positive points in the fit window",
            pts.len()
        )));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, y) in pts {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    Ok(sxy / sxx)
}

/// Index-wise trial averaging with compensated summation. Streams from all
/// trials must share the same recorded `k` grid.
#[derive(Debug, Default)]
pub struct TrialAverager {
    trials: usize,
    ks: Vec<u64>,
    alphas: Vec<f64>,
    loss: Vec<KahanSum>,
    opt_gap_mean: Vec<KahanSum>,
    opt_gap_nodes: Vec<KahanSum>,
    stationary: Vec<KahanSum>,
    consensus: Vec<KahanSum>,
    tracking: Vec<KahanSum>,
    has_gap: bool,
    has_consensus: bool,
    has_tracking: bool,
}

impl TrialAverager {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn trials(&self) -> usize {
        self.trials
    }

    pub fn fold(&mut self, records: &[MetricsRecord]) -> Result<()> {
        if self.trials == 0 {
            self.ks = records.iter().map(|r| r.k).collect();
            self.alphas = records.iter().map(|r| r.alpha_k).collect();
            let m = records.len();
            self.loss = vec![KahanSum::default(); m];
            self.opt_gap_mean = vec![KahanSum::default(); m];
            self.opt_gap_nodes = vec![KahanSum::default(); m];
            self.stationary = vec![KahanSum::default(); m];
            self.consensus = vec![KahanSum::default(); m];
            self.tracking = vec![KahanSum::default(); m];
            self.has_gap = records.iter().all(|r| r.opt_gap_mean.is_some());
            self.has_consensus = records.iter().all(|r| r.consensus_err.is_some());
            self.has_tracking = records.iter().all(|r| r.tracking_err.is_some() || r.k == *self.ks.last().unwrap());
        } else if records.len() != self.ks.len()
            || records.iter().zip(&self.ks).any(|(r, k)| r.k != *k)
        {
            return Err(Error::Analysis("trial streams have mismatched k grids".into()));
        }
        for (i, r) in records.iter().enumerate() {
            self.loss[i].add(r.loss);
            self.stationary[i].add(r.stationary_gap_avg);
            if let Some(v) = r.opt_gap_mean {
                self.opt_gap_mean[i].add(v);
            }
            if let Some(v) = r.opt_gap_nodes {
                self.opt_gap_nodes[i].add(v);
            }
            if let Some(v) = r.consensus_err {
                self.consensus[i].add(v);
            }
            if let Some(v) = r.tracking_err {
                self.tracking[i].add(v);
            }
        }
        self.trials += 1;
        Ok(())
    }

    /// Trial-mean record stream.
    pub fn mean(&self) -> Vec<MetricsRecord> {
        let t = self.trials.max(1) as f64;
        let last_k = self.ks.last().copied();
        self.ks
            .iter()
            .enumerate()
            .map(|(i, &k)| MetricsRecord {
                k,
                alpha_k: self.alphas[i],
                loss: self.loss[i].value() / t,
                opt_gap_mean: self.has_gap.then(|| self.opt_gap_mean[i].value() / t),
                opt_gap_nodes: self.has_gap.then(|| self.opt_gap_nodes[i].value() / t),
                stationary_gap_avg: self.stationary[i].value() / t,
                consensus_err: self.has_consensus.then(|| self.consensus[i].value() / t),
                tracking_err: (self.has_tracking && Some(k) != last_k)
                    .then(|| self.tracking[i].value() / t),
            })
            .collect()
    }
}

/// Sample mean and standard error.
pub fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Result of comparing a measured expectation against a closed-form bound.
#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub name: String,
    pub value: f64,
    pub measured: f64,
    pub stderr: f64,
    pub margin: f64,
    pub pass: bool,
    pub low_confidence: bool,
    pub note: String,
}

/// Mean-plus-two-stderr comparison of per-trial scalars against a bound.
/// Fewer than 10 trials flags the verdict low-confidence.
pub fn bound_check_scalar(name: &str, per_trial: &[f64], bound: f64, note: &str) -> BoundReport {
    let (mean, se) = mean_stderr(per_trial);
    let measured = mean + 2.0 * se;
    BoundReport {
        name: name.into(),
        value: bound,
        measured,
        stderr: se,
        margin: bound - measured,
        pass: measured <= bound,
        low_confidence: per_trial.len() < 10,
        note: note.into(),
    }
}

/// Check a trial-averaged stream against a per-k bound; reports the worst
/// margin over the recorded window.
pub fn bound_check_stream(
    name: &str,
    ks: &[u64],
    vals: &[f64],
    trials: usize,
    bound_fn: impl Fn(u64) -> f64,
    note: &str,
) -> BoundReport {
    let mut worst_margin = f64::INFINITY;
    let mut worst_val = 0.0;
    let mut worst_bound = 0.0;
    for (&k, &v) in ks.iter().zip(vals) {
        let b = bound_fn(k);
        let m = b - v;
        if m < worst_margin {
            worst_margin = m;
            worst_val = v;
            worst_bound = b;
        }
    }
    BoundReport {
        name: name.into(),
        value: worst_bound,
        measured: worst_val,
        stderr: 0.0,
        margin: worst_margin,
        pass: worst_margin >= 0.0,
        low_confidence: trials < 10,
        note: note.into(),
    }
}
