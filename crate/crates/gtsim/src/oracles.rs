//! Stochastic gradient oracles: unbiased per-node gradient sources with
//! known or estimated variance bounds and independent per-node streams.

use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::objectives::ObjectiveSuite;
use crate::rng;

/// Draws used to estimate the sampling oracle's per-node variance at x0.
pub const NU_ESTIMATE_DRAWS: usize = 10_000;

#[derive(Debug, Clone)]
enum OracleMode {
    /// Exact local gradient plus `N(0, sigma_i^2 I)` noise; sigma = 0 gives
    /// the exact-gradient regime.
    Gaussian { sigma: Vec<f64> },
    /// Mean gradient over `batch` uniform-with-replacement draws from the
    /// node's shard, plus the exact regularizer gradient.
    Sampling { batch: usize },
}

/// Per-node stochastic gradient source. Each node owns an independent
/// ChaCha stream keyed by `(master seed, trial, node)`, so draws are
/// reproducible and never shared across nodes or trials.
#[derive(Debug, Clone)]
pub struct GradientOracle {
    suite: Arc<ObjectiveSuite>,
    mode: OracleMode,
    nu_sq: Vec<f64>,
    nu_estimated: bool,
    streams: Vec<ChaCha8Rng>,
}

impl GradientOracle {
    pub fn suite(&self) -> &Arc<ObjectiveSuite> {
        &self.suite
    }

    /// Per-node variance bounds `nu_i^2`.
    pub fn nu_sq(&self) -> &[f64] {
        &self.nu_sq
    }

    /// `nu_a^2`, the node average of the variance bounds.
    pub fn nu_a_sq(&self) -> f64 {
        self.nu_sq.iter().sum::<f64>() / self.nu_sq.len() as f64
    }

    /// Whether `nu_i^2` was estimated empirically (sampling mode) rather
    /// than known in closed form.
    pub fn nu_estimated(&self) -> bool {
        self.nu_estimated
    }

    /// Draw a stochastic gradient for node `i` at `x`.
    pub fn sample(&mut self, i: usize, x: &[f64], out: &mut [f64]) {
        match &self.mode {
            OracleMode::Gaussian { sigma } => {
                self.suite.local_grad(i, x, out);
                let s = sigma[i];
                if s > 0.0 {
                    let g = &mut self.streams[i];
                    for v in out.iter_mut() {
                        *v += s * g.sample::<f64, _>(StandardNormal);
                    }
                }
            }
            OracleMode::Sampling { batch } => {
                let m = self.suite.shard_len(i).expect("sampling oracle requires a finite-sum suite");
                let batch = *batch;
                out.iter_mut().for_each(|v| *v = 0.0);
                let mut tmp = vec![0.0; x.len()];
                for _ in 0..batch {
                    let j = self.streams[i].gen_range(0..m);
                    self.suite
                        .per_sample_grad(i, j, x, &mut tmp)
                        .expect("finite-sum suite checked at construction");
                    for (o, t) in out.iter_mut().zip(&tmp) {
                        *o += t;
                    }
                }
                let inv = 1.0 / batch as f64;
                out.iter_mut().for_each(|v| *v *= inv);
            }
        }
    }
}

/// Exact gradients plus Gaussian noise of per-node std `sigma`;
/// `nu_i^2 = p sigma_i^2` in closed form.
pub fn gaussian_oracle(
    suite: Arc<ObjectiveSuite>,
    sigma: &[f64],
    master_seed: u64,
    trial: u64,
) -> Result<GradientOracle> {
    let n = suite.n();
    let sigma: Vec<f64> = match sigma.len() {
        1 => vec![sigma[0]; n],
        len if len == n => sigma.to_vec(),
        len => {
            return Err(Error::Oracle(format!(
                "sigma needs 1 or {n} entries, got {len}"
            )))
        }
    };
    if sigma.iter().any(|&s| s < 0.0) {
        return Err(Error::Oracle("sigma must be >= 0".into()));
    }
    let p = suite.p() as f64;
    let nu_sq = sigma.iter().map(|s| p * s * s).collect();
    let streams = (0..n).map(|i| rng::stream(master_seed, trial, i as u64)).collect();
    Ok(GradientOracle { suite, mode: OracleMode::Gaussian { sigma }, nu_sq, nu_estimated: false, streams })
}

/// Minibatch sampling oracle over a finite-sum suite. `nu_i^2` is estimated
/// at `x0` with [`NU_ESTIMATE_DRAWS`] draws from side streams (the run
/// streams are untouched) and flagged as estimated in reports.
pub fn sampling_oracle(
    suite: Arc<ObjectiveSuite>,
    batch: usize,
    master_seed: u64,
    trial: u64,
    x0: &[f64],
) -> Result<GradientOracle> {
    let n = suite.n();
    if batch < 1 {
        return Err(Error::Oracle("batch must be >= 1".into()));
    }
    for i in 0..n {
        match suite.shard_len(i) {
            None => return Err(Error::Oracle("sampling oracle requires a finite-sum suite".into())),
            Some(0) => return Err(Error::Oracle(format!("node {i} has an empty shard"))),
            Some(m) if batch > m => {
                return Err(Error::Oracle(format!(
                    "batch {batch} exceeds node {i}'s shard size {m}"
                )))
            }
            _ => {}
        }
    }
    let streams: Vec<ChaCha8Rng> = (0..n).map(|i| rng::stream(master_seed, trial, i as u64)).collect();
    // estimation clone uses disjoint streams so the run sequence is untouched
    let mut probe = GradientOracle {
        suite: suite.clone(),
        mode: OracleMode::Sampling { batch },
        nu_sq: vec![0.0; n],
        nu_estimated: true,
        streams: (0..n)
            .map(|i| rng::stream(master_seed, trial, (i + n) as u64))
            .collect(),
    };
    let report = variance_report(&mut probe, x0, NU_ESTIMATE_DRAWS)?;
    Ok(GradientOracle {
        suite,
        mode: OracleMode::Sampling { batch },
        nu_sq: report.per_node,
        nu_estimated: true,
        streams,
    })
}

/// Empirical variance report at a fixed point.
#[derive(Debug, Clone)]
pub struct VarianceReport {
    /// Per-node second moments of `g - grad f_i` at `x`.
    pub per_node: Vec<f64>,
    /// Their average, the empirical `nu_a^2`.
    pub average: f64,
}

/// Estimate `nu_i^2` and `nu_a^2 = mean_i nu_i^2` at `x` from `draws`
/// samples per node. Consumes oracle draws; call on a clone to keep a run
/// stream pristine.
pub fn variance_report(oracle: &mut GradientOracle, x: &[f64], draws: usize) -> Result<VarianceReport> {
    if draws < 100 {
        return Err(Error::Oracle("variance report needs at least 100 draws".into()));
    }
    let suite = oracle.suite.clone();
    let n = suite.n();
    let p = suite.p();
    let mut exact = vec![0.0; p];
    let mut g = vec![0.0; p];
    let mut per_node = Vec::with_capacity(n);
    for i in 0..n {
        suite.local_grad(i, x, &mut exact);
        let mut acc = 0.0;
        for _ in 0..draws {
            oracle.sample(i, x, &mut g);
            acc += g.iter().zip(&exact).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
        }
        per_node.push(acc / draws as f64);
    }
    let average = per_node.iter().sum::<f64>() / n as f64;
    Ok(VarianceReport { per_node, average })
}
