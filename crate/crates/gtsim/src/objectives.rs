//! Objective families: per-node losses with exact gradients and the
//! smoothness / PL constants the bound evaluators consume.
//!
//! Three built-in families:
//! - a 1-d synthetic family whose global objective `x^2 + 3 sin^2 x` is
//!   non-convex but satisfies the PL condition, with zero-sum per-node
//!   heterogeneity terms;
//! - binary logistic regression with a bounded non-convex regularizer over a
//!   per-node dataset partition;
//! - a heterogeneous 1-d quadratic family with exact constants (L = mu = 2),
//!   used as the condition-number-1 calibration case.

use rand::Rng;

use crate::error::{Error, Result};
use crate::rng;

/// Operating box for the synthetic PL family. The heterogeneity term
/// `a_i x cos x` has unbounded curvature, so L is taken over this interval
/// and runs are expected to stay inside it.
pub const PL_OPERATING_BOX: (f64, f64) = (-10.0, 10.0);

/// Grid resolution used for the closed-form L and PL-constant scans.
const PL_MU_GRID: usize = 1_000_001;
const PL_L_GRID: usize = 400_001;

/// One labeled sample: feature vector and a +/-1 label.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub label: f64,
    pub features: Vec<f64>,
}

/// Per-node sample shards. Every sample lives on exactly one node.
#[derive(Debug, Clone)]
pub struct DatasetPartition {
    p: usize,
    shards: Vec<Vec<Sample>>,
    strategy: String,
}

impl DatasetPartition {
    pub fn new(shards: Vec<Vec<Sample>>, strategy: impl Into<String>) -> Result<Self> {
        let p = shards
            .iter()
            .flat_map(|s| s.iter())
            .map(|s| s.features.len())
            .next()
            .ok_or_else(|| Error::Dataset("partition has no samples".into()))?;
        if shards.iter().any(|s| s.is_empty()) {
            return Err(Error::Dataset("every node needs at least one sample".into()));
        }
        if shards.iter().flat_map(|s| s.iter()).any(|s| s.features.len() != p) {
            return Err(Error::Dataset("inconsistent feature dimensions".into()));
        }
        Ok(DatasetPartition { p, shards, strategy: strategy.into() })
    }

    pub fn n(&self) -> usize {
        self.shards.len()
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn shard(&self, i: usize) -> &[Sample] {
        &self.shards[i]
    }

    pub fn strategy(&self) -> &str {
        &self.strategy
    }

    pub fn counts(&self) -> Vec<usize> {
        self.shards.iter().map(|s| s.len()).collect()
    }

    /// Fraction of the majority label on each node.
    pub fn label_purity(&self) -> Vec<f64> {
        self.shards
            .iter()
            .map(|s| {
                let pos = s.iter().filter(|x| x.label > 0.0).count();
                let m = pos.max(s.len() - pos);
                m as f64 / s.len() as f64
            })
            .collect()
    }
}

#[derive(Debug, Clone)]
enum SuiteKind {
    PlSynthetic { a: Vec<f64> },
    Logistic { partition: DatasetPartition, reg: f64 },
    Quadratic { offsets: Vec<f64> },
}

/// A set of `n` local objectives with exact value/gradient evaluators and
/// the constants entering the convergence bounds.
#[derive(Debug, Clone)]
pub struct ObjectiveSuite {
    n: usize,
    p: usize,
    l_smooth: f64,
    mu: Option<f64>,
    f_star: Option<f64>,
    x_star: Option<Vec<f64>>,
    operating_box: Option<(f64, f64)>,
    kind: SuiteKind,
}

impl ObjectiveSuite {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    /// Smoothness constant L (closed-form for the built-in families).
    pub fn l_smooth(&self) -> f64 {
        self.l_smooth
    }

    /// PL constant of the global objective, when known.
    pub fn mu(&self) -> Option<f64> {
        self.mu
    }

    pub fn kappa(&self) -> Option<f64> {
        self.mu.map(|m| self.l_smooth / m)
    }

    pub fn f_star(&self) -> Option<f64> {
        self.f_star
    }

    pub fn x_star(&self) -> Option<&[f64]> {
        self.x_star.as_deref()
    }

    pub fn operating_box(&self) -> Option<(f64, f64)> {
        self.operating_box
    }

    pub fn local_value(&self, i: usize, x: &[f64]) -> f64 {
        match &self.kind {
            SuiteKind::PlSynthetic { a } => {
                let t = x[0];
                t * t + 3.0 * t.sin().powi(2) + a[i] * t * t.cos()
            }
            SuiteKind::Logistic { partition, reg } => {
                let shard = partition.shard(i);
                let mut acc = 0.0;
                for s in shard {
                    acc += logistic_loss(margin(x, s));
                }
                acc / shard.len() as f64 + regularizer(x, *reg)
            }
            SuiteKind::Quadratic { offsets } => {
                let d = x[0] - offsets[i];
                d * d
            }
        }
    }

    pub fn local_grad(&self, i: usize, x: &[f64], out: &mut [f64]) {
        match &self.kind {
            SuiteKind::PlSynthetic { a } => {
                let t = x[0];
                out[0] = 2.0 * t + 3.0 * (2.0 * t).sin() + a[i] * (t.cos() - t * t.sin());
            }
            SuiteKind::Logistic { partition, reg } => {
                let shard = partition.shard(i);
                out.iter_mut().for_each(|v| *v = 0.0);
                for s in shard {
                    accumulate_sample_grad(x, s, 1.0 / shard.len() as f64, out);
                }
                add_regularizer_grad(x, *reg, out);
            }
            SuiteKind::Quadratic { offsets } => {
                out[0] = 2.0 * (x[0] - offsets[i]);
            }
        }
    }

    /// Global objective `F(x) = (1/n) sum_i f_i(x)`.
    pub fn global_value(&self, x: &[f64]) -> f64 {
        match &self.kind {
            // zero-sum a_i cancel exactly
            SuiteKind::PlSynthetic { .. } => {
                let t = x[0];
                t * t + 3.0 * t.sin().powi(2)
            }
            SuiteKind::Quadratic { offsets } => {
                let t = x[0];
                let ms = offsets.iter().map(|c| c * c).sum::<f64>() / offsets.len() as f64;
                t * t + ms
            }
            SuiteKind::Logistic { .. } => {
                (0..self.n).map(|i| self.local_value(i, x)).sum::<f64>() / self.n as f64
            }
        }
    }

    pub fn global_grad(&self, x: &[f64], out: &mut [f64]) {
        match &self.kind {
            SuiteKind::PlSynthetic { .. } => {
                let t = x[0];
                out[0] = 2.0 * t + 3.0 * (2.0 * t).sin();
            }
            SuiteKind::Quadratic { .. } => {
                out[0] = 2.0 * x[0];
            }
            SuiteKind::Logistic { .. } => {
                out.iter_mut().for_each(|v| *v = 0.0);
                let mut tmp = vec![0.0; self.p];
                for i in 0..self.n {
                    self.local_grad(i, x, &mut tmp);
                    for (o, g) in out.iter_mut().zip(&tmp) {
                        *o += g;
                    }
                }
                let inv = 1.0 / self.n as f64;
                out.iter_mut().for_each(|v| *v *= inv);
            }
        }
    }

    /// Squared norm of the stacked local gradients at per-node states,
    /// `||∇f||^2 = sum_i ||∇f_i(x^i)||^2`.
    pub fn stacked_grad_norm_sq(&self, states: &crate::linalg::Mat) -> f64 {
        let mut tmp = vec![0.0; self.p];
        let mut acc = 0.0;
        for i in 0..self.n {
            self.local_grad(i, states.row(i), &mut tmp);
            acc += tmp.iter().map(|g| g * g).sum::<f64>();
        }
        acc
    }

    /// Number of samples on node `i`, when the suite is a finite sum.
    pub fn shard_len(&self, i: usize) -> Option<usize> {
        match &self.kind {
            SuiteKind::Logistic { partition, .. } => Some(partition.shard(i).len()),
            _ => None,
        }
    }

    /// Gradient of the j-th sample's loss on node `i` (plus the exact
    /// regularizer gradient). Only for finite-sum suites.
    pub fn per_sample_grad(&self, i: usize, j: usize, x: &[f64], out: &mut [f64]) -> Result<()> {
        match &self.kind {
            SuiteKind::Logistic { partition, reg } => {
                out.iter_mut().for_each(|v| *v = 0.0);
                accumulate_sample_grad(x, &partition.shard(i)[j], 1.0, out);
                add_regularizer_grad(x, *reg, out);
                Ok(())
            }
            _ => Err(Error::Objective("per-sample gradients need a finite-sum suite".into())),
        }
    }
}

#[inline]
fn margin(x: &[f64], s: &Sample) -> f64 {
    let dot: f64 = x.iter().zip(&s.features).map(|(a, b)| a * b).sum();
    dot * s.label
}

/// `log(1 + exp(-z))`, stable for large |z|.
#[inline]
fn logistic_loss(z: f64) -> f64 {
    if z > 0.0 {
        (-z).exp().ln_1p()
    } else {
        -z + z.exp().ln_1p()
    }
}

/// `sigma(-z) = 1 / (1 + exp(z))`, stable for large |z|.
#[inline]
fn sigmoid_neg(z: f64) -> f64 {
    if z >= 0.0 {
        let e = (-z).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + z.exp())
    }
}

#[inline]
fn accumulate_sample_grad(x: &[f64], s: &Sample, scale: f64, out: &mut [f64]) {
    let coeff = -s.label * sigmoid_neg(margin(x, s)) * scale;
    for (o, th) in out.iter_mut().zip(&s.features) {
        *o += coeff * th;
    }
}

fn regularizer(x: &[f64], r: f64) -> f64 {
    x.iter().map(|&v| r * v * v / (1.0 + v * v)).sum()
}

fn add_regularizer_grad(x: &[f64], r: f64, out: &mut [f64]) {
    for (o, &v) in out.iter_mut().zip(x) {
        let d = 1.0 + v * v;
        *o += 2.0 * r * v / (d * d);
    }
}

/// Zero-sum, all-nonzero heterogeneity coefficients scaled by `scale`.
fn heterogeneity_coefficients(n: usize, scale: f64) -> Vec<f64> {
    let mid = (n - 1) as f64 / 2.0;
    let mut a: Vec<f64> = (0..n).map(|i| i as f64 - mid).collect();
    if n % 2 == 1 {
        // the centered integer sequence has a zero in the middle; shift it
        // onto a neighbor to keep the sum zero and every entry nonzero
        let m = n / 2;
        a[m] = 1.0;
        a[m - 1] -= 1.0;
    }
    a.iter_mut().for_each(|v| *v *= scale);
    a
}

/// Synthetic PL family: `f_i(x) = x^2 + 3 sin^2 x + a_i x cos x` with
/// zero-sum nonzero `a_i`, so `F(x) = x^2 + 3 sin^2 x`, `F* = 0` at `x* = 0`.
/// L is the closed-form curvature maximum over [`PL_OPERATING_BOX`]; mu is
/// the PL-ratio grid minimum over the same interval.
pub fn pl_synthetic_suite(n: usize, hetero_scale: f64) -> Result<ObjectiveSuite> {
    if n < 2 {
        return Err(Error::Objective("pl_synthetic_suite needs n >= 2 for zero-sum nonzero a_i".into()));
    }
    if hetero_scale <= 0.0 {
        return Err(Error::Objective("hetero_scale must be > 0 so that a_i != 0".into()));
    }
    let a = heterogeneity_coefficients(n, hetero_scale);
    let (lo, hi) = PL_OPERATING_BOX;
    let a_max = a.iter().fold(0.0_f64, |m, &v| m.max(v.abs()));
    let mut l_smooth = 0.0_f64;
    for k in 0..PL_L_GRID {
        let x = lo + (hi - lo) * k as f64 / (PL_L_GRID - 1) as f64;
        let base = 2.0 + 6.0 * (2.0 * x).cos();
        let het = 2.0 * x.sin() + x * x.cos();
        l_smooth = l_smooth.max((base - a_max * het).abs()).max((base + a_max * het).abs());
    }
    let mu = estimate_pl_constant(
        |x| x * x + 3.0 * x.sin().powi(2),
        |x| 2.0 * x + 3.0 * (2.0 * x).sin(),
        0.0,
        lo,
        hi,
        PL_MU_GRID,
    )?;
    Ok(ObjectiveSuite {
        n,
        p: 1,
        l_smooth,
        mu: Some(mu),
        f_star: Some(0.0),
        x_star: Some(vec![0.0]),
        operating_box: Some(PL_OPERATING_BOX),
        kind: SuiteKind::PlSynthetic { a },
    })
}

/// Non-convex logistic regression over a dataset partition. Each node's
/// objective is its mean sample loss plus the bounded regularizer
/// `sum_d R x_d^2 / (1 + x_d^2)`, so `F = (1/n) sum f_i` keeps the canonical
/// form. `L = max_i mean_j ||theta_ij||^2 / 4 + 2R`; mu and F* are unknown.
pub fn ncvx_logistic_suite(partition: DatasetPartition, reg: f64) -> Result<ObjectiveSuite> {
    if reg < 0.0 {
        return Err(Error::Objective("regularizer weight must be >= 0".into()));
    }
    let n = partition.n();
    let p = partition.p();
    let mut worst = 0.0_f64;
    for i in 0..n {
        let shard = partition.shard(i);
        let mean_sq = shard
            .iter()
            .map(|s| s.features.iter().map(|t| t * t).sum::<f64>())
            .sum::<f64>()
            / shard.len() as f64;
        worst = worst.max(mean_sq);
    }
    Ok(ObjectiveSuite {
        n,
        p,
        l_smooth: 0.25 * worst + 2.0 * reg,
        mu: None,
        f_star: None,
        x_star: None,
        operating_box: None,
        kind: SuiteKind::Logistic { partition, reg },
    })
}

/// Heterogeneous quadratic family: `f_i(x) = (x - c_i)^2` with zero-sum
/// offsets `c_i`, so `F(x) = x^2 + mean(c^2)` and L = mu = 2 exactly.
pub fn quadratic_suite(n: usize, offset_scale: f64) -> Result<ObjectiveSuite> {
    if n < 1 {
        return Err(Error::Objective("quadratic_suite needs n >= 1".into()));
    }
    let offsets = if n == 1 {
        vec![0.0]
    } else {
        heterogeneity_coefficients(n, offset_scale)
    };
    let f_star = offsets.iter().map(|c| c * c).sum::<f64>() / n as f64;
    Ok(ObjectiveSuite {
        n,
        p: 1,
        l_smooth: 2.0,
        mu: Some(2.0),
        f_star: Some(f_star),
        x_star: Some(vec![0.0]),
        operating_box: None,
        kind: SuiteKind::Quadratic { offsets },
    })
}

/// Grid estimate of the PL constant: the minimum of
/// `||F'(x)||^2 / (2 (F(x) - F*))` over `grid_points` samples of
/// `[lo, hi]`, skipping points with `F - F* < 1e-12`.
pub fn estimate_pl_constant(
    f: impl Fn(f64) -> f64,
    fp: impl Fn(f64) -> f64,
    f_star: f64,
    lo: f64,
    hi: f64,
    grid_points: usize,
) -> Result<f64> {
    if grid_points < 100 {
        return Err(Error::Objective("PL estimate needs at least 100 grid points".into()));
    }
    let mut best = f64::INFINITY;
    for k in 0..grid_points {
        let x = lo + (hi - lo) * k as f64 / (grid_points - 1) as f64;
        let gap = f(x) - f_star;
        if gap < 1e-12 {
            continue;
        }
        let g = fp(x);
        best = best.min(g * g / (2.0 * gap));
    }
    if best.is_finite() {
        Ok(best)
    } else {
        Err(Error::Objective("no valid probe points for the PL estimate".into()))
    }
}

/// Probe-pair smoothness estimate: the maximum gradient difference ratio
/// over random pairs in the box, times a 1.05 safety margin.
pub fn estimate_smoothness(
    grad: impl Fn(&[f64], &mut [f64]),
    p: usize,
    lo: f64,
    hi: f64,
    pairs: usize,
    seed: u64,
) -> Result<f64> {
    if pairs < 1000 {
        return Err(Error::Objective("smoothness estimate needs at least 1000 probe pairs".into()));
    }
    let mut g = rng::stream(seed, 0, u64::MAX - 1);
    let mut x = vec![0.0; p];
    let mut y = vec![0.0; p];
    let mut gx = vec![0.0; p];
    let mut gy = vec![0.0; p];
    let mut best = 0.0_f64;
    for _ in 0..pairs {
        for (a, b) in x.iter_mut().zip(y.iter_mut()) {
            *a = g.gen_range(lo..hi);
            *b = g.gen_range(lo..hi);
        }
        let dist_sq: f64 = x.iter().zip(&y).map(|(a, b)| (a - b) * (a - b)).sum();
        if dist_sq < 1e-20 {
            continue;
        }
        grad(&x, &mut gx);
        grad(&y, &mut gy);
        let diff_sq: f64 = gx.iter().zip(&gy).map(|(a, b)| (a - b) * (a - b)).sum();
        best = best.max((diff_sq / dist_sq).sqrt());
    }
    Ok(best * 1.05)
}

/// Parse the delimited ingestion format: one `label,feat1,feat2,...` line
/// per sample; labels in {-1, +1} or {0, 1} (the latter mapped to -1/+1).
pub fn parse_dataset_text(text: &str) -> Result<Vec<Sample>> {
    let mut samples = Vec::new();
    let mut dim: Option<usize> = None;
    for (ln, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut it = line.split(',').map(str::trim);
        let label: f64 = it
            .next()
            .unwrap()
            .parse()
            .map_err(|_| Error::Dataset(format!("line {}: bad label", ln + 1)))?;
        let features: std::result::Result<Vec<f64>, _> = it.map(|t| t.parse::<f64>()).collect();
        let features =
            features.map_err(|_| Error::Dataset(format!("line {}: bad feature value", ln + 1)))?;
        if features.is_empty() {
            return Err(Error::Dataset(format!("line {}: no features", ln + 1)));
        }
        match dim {
            None => dim = Some(features.len()),
            Some(d) if d != features.len() => {
                return Err(Error::Dataset(format!(
                    "line {}: dimension {} differs from {}",
                    ln + 1,
                    features.len(),
                    d
                )))
            }
            _ => {}
        }
        samples.push(Sample { label, features });
    }
    if samples.is_empty() {
        return Err(Error::Dataset("dataset is empty".into()));
    }
    let zero_one = samples.iter().all(|s| s.label == 0.0 || s.label == 1.0);
    let pm_one = samples.iter().all(|s| s.label == -1.0 || s.label == 1.0);
    if zero_one && !pm_one {
        for s in samples.iter_mut() {
            s.label = if s.label == 0.0 { -1.0 } else { 1.0 };
        }
    } else if !pm_one {
        return Err(Error::Dataset("labels must be in {-1,+1} or {0,1}".into()));
    }
    Ok(samples)
}

/// How samples are assigned to nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PartitionStrategy {
    /// Global shuffle, then an even split.
    Iid,
    /// Sort by label so each node sees (predominantly) one class.
    LabelSorted,
}

impl PartitionStrategy {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "iid" => Ok(PartitionStrategy::Iid),
            "label_sorted" => Ok(PartitionStrategy::LabelSorted),
            other => Err(Error::Config(format!(
                "unknown partition strategy {other:?} (accepted: iid, label_sorted)"
            ))),
        }
    }
}

/// Split samples across `n` nodes, deterministically in `seed`.
pub fn partition_samples(
    mut samples: Vec<Sample>,
    n: usize,
    strategy: PartitionStrategy,
    seed: u64,
) -> Result<DatasetPartition> {
    if samples.len() < n {
        return Err(Error::Dataset(format!(
            "need at least one sample per node ({} samples, {} nodes)",
            samples.len(),
            n
        )));
    }
    match strategy {
        PartitionStrategy::Iid => {
            let mut g = rng::stream(seed, 0, u64::MAX - 2);
            // Fisher-Yates
            for i in (1..samples.len()).rev() {
                let j = g.gen_range(0..=i);
                samples.swap(i, j);
            }
        }
        PartitionStrategy::LabelSorted => {
            samples.sort_by(|a, b| b.label.partial_cmp(&a.label).unwrap());
        }
    }
    let total = samples.len();
    let base = total / n;
    let extra = total % n;
    let mut shards = Vec::with_capacity(n);
    let mut it = samples.into_iter();
    for i in 0..n {
        let take = base + usize::from(i < extra);
        shards.push(it.by_ref().take(take).collect());
    }
    let tag = match strategy {
        PartitionStrategy::Iid => "iid",
        PartitionStrategy::LabelSorted => "label_sorted",
    };
    DatasetPartition::new(shards, tag)
}

/// Feature geometry of the synthetic classification generator: class means
/// at `+/- m` with `||m|| = 0.4` and isotropic noise of std 0.35. Chosen so
/// the logistic suite's L stays close to 0.2 and transient-time experiments
/// fit desk scale.
pub const SYNTH_MEAN_NORM: f64 = 0.4;
pub const SYNTH_NOISE_STD: f64 = 0.35;

/// Two-cluster Gaussian binary classification data, split per `strategy`.
pub fn synthetic_classification_partition(
    n: usize,
    samples_per_node: usize,
    p: usize,
    strategy: PartitionStrategy,
    seed: u64,
) -> Result<DatasetPartition> {
    if samples_per_node < 1 {
        return Err(Error::Dataset("samples_per_node must be >= 1".into()));
    }
    if p < 1 {
        return Err(Error::Dataset("feature dimension must be >= 1".into()));
    }
    let mut g = rng::stream(seed, 0, u64::MAX - 3);
    let mut mean: Vec<f64> = (0..p).map(|_| g.sample::<f64, _>(rand_distr::StandardNormal)).collect();
    let norm = mean.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-12);
    mean.iter_mut().for_each(|v| *v *= SYNTH_MEAN_NORM / norm);
    let total = n * samples_per_node;
    let mut samples = Vec::with_capacity(total);
    for j in 0..total {
        let label = if j % 2 == 0 { 1.0 } else { -1.0 };
        let features: Vec<f64> = mean
            .iter()
            .map(|m| m * label + SYNTH_NOISE_STD * g.sample::<f64, _>(rand_distr::StandardNormal))
            .collect();
        samples.push(Sample { label, features });
    }
    partition_samples(samples, n, strategy, seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd_grad(suite: &ObjectiveSuite, i: usize, x: &[f64], d: usize) -> f64 {
        let h = 1e-5;
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[d] += h;
        xm[d] -= h;
        (suite.local_value(i, &xp) - suite.local_value(i, &xm)) / (2.0 * h)
    }

    #[test]
    fn pl_suite_at_origin() {
        let s = pl_synthetic_suite(16, 1.0).unwrap();
        assert_eq!(s.global_value(&[0.0]), 0.0);
        let mut g = [0.0];
        s.global_grad(&[0.0], &mut g);
        assert_eq!(g[0], 0.0);
        assert_eq!(s.f_star(), Some(0.0));
    }

    #[test]
    fn pl_suite_zero_sum_cancellation() {
        let s = pl_synthetic_suite(16, 2.5).unwrap();
        let mut g = [0.0];
        let mut r = rng::stream(9, 0, 0);
        for _ in 0..1000 {
            let x = [r.gen_range(-10.0..10.0)];
            let mut acc = 0.0;
            let mut vacc = 0.0;
            for i in 0..16 {
                s.local_grad(i, &x, &mut g);
                acc += g[0];
                vacc += s.local_value(i, &x);
            }
            let expect = 2.0 * x[0] + 3.0 * (2.0 * x[0]).sin();
            assert!((acc / 16.0 - expect).abs() < 1e-12);
            assert!((vacc / 16.0 - s.global_value(&x)).abs() < 1e-12);
        }
    }

    #[test]
    fn pl_suite_constants() {
        let s = pl_synthetic_suite(16, 1.0).unwrap();
        // global curvature alone peaks at 8; heterogeneity only adds
        assert!(s.l_smooth() >= 8.0);
        let mu = s.mu().unwrap();
        assert!((mu - 0.175531).abs() < 1e-4, "mu = {mu}");
    }

    #[test]
    fn pl_suite_odd_n_coefficients() {
        let s = pl_synthetic_suite(5, 1.0).unwrap();
        let mut acc = 0.0;
        let mut g = [0.0];
        // a_i recovered through gradients at x=1: grad = base + a_i*(cos1 - sin1)
        let x = [1.0];
        let base = 2.0 + 3.0 * (2.0_f64).sin();
        for i in 0..5 {
            s.local_grad(i, &x, &mut g);
            let a = (g[0] - base) / (1.0_f64.cos() - 1.0_f64.sin());
            assert!(a.abs() > 1e-9, "a_{i} must be nonzero");
            acc += a;
        }
        assert!(acc.abs() < 1e-9, "zero sum, got {acc}");
    }

    #[test]
    fn pl_suite_rejects_degenerate() {
        assert!(pl_synthetic_suite(1, 1.0).is_err());
        assert!(pl_synthetic_suite(16, 0.0).is_err());
    }

    #[test]
    fn pl_assumption_holds_on_fresh_grid() {
        let s = pl_synthetic_suite(4, 1.0).unwrap();
        let mu = s.mu().unwrap();
        // offset grid, disjoint from the estimation grid
        let m = 200_001;
        let half = 20.0 / (m as f64 - 1.0) / 2.0;
        for k in 0..m - 1 {
            let x = -10.0 + 20.0 * k as f64 / (m as f64 - 1.0) + half;
            let f = s.global_value(&[x]);
            let mut g = [0.0];
            s.global_grad(&[x], &mut g);
            assert!(2.0 * mu * f <= g[0] * g[0] + 1e-9, "x = {x}");
        }
    }

    #[test]
    fn lemma_upper_bound_holds_with_suite_constants() {
        // ||grad F||^2 <= 2 L (F - F*) on probes
        let s = pl_synthetic_suite(8, 1.0).unwrap();
        let l = s.l_smooth();
        let mut r = rng::stream(10, 0, 0);
        for _ in 0..1000 {
            let x = [r.gen_range(-10.0..10.0)];
            let f = s.global_value(&x);
            let mut g = [0.0];
            s.global_grad(&x, &mut g);
            assert!(g[0] * g[0] <= 2.0 * l * f + 1e-9);
        }
    }

    #[test]
    fn gradients_match_finite_differences() {
        let part = synthetic_classification_partition(4, 20, 3, PartitionStrategy::Iid, 5).unwrap();
        let suites = [
            pl_synthetic_suite(4, 1.5).unwrap(),
            ncvx_logistic_suite(part, 1e-4).unwrap(),
            quadratic_suite(4, 1.0).unwrap(),
        ];
        let mut r = rng::stream(11, 0, 0);
        for s in &suites {
            let mut g = vec![0.0; s.p()];
            for _ in 0..100 {
                let i = r.gen_range(0..s.n());
                let x: Vec<f64> = (0..s.p()).map(|_| r.gen_range(-3.0..3.0)).collect();
                let d = r.gen_range(0..s.p());
                s.local_grad(i, &x, &mut g);
                let fd = fd_grad(s, i, &x, d);
                assert!((g[d] - fd).abs() <= 1e-5, "grad {} vs fd {}", g[d], fd);
            }
        }
    }

    #[test]
    fn local_grads_are_l_lipschitz_on_box() {
        let s = pl_synthetic_suite(6, 2.0).unwrap();
        let l = s.l_smooth();
        let mut r = rng::stream(12, 0, 0);
        let (mut ga, mut gb) = ([0.0], [0.0]);
        for _ in 0..2000 {
            let i = r.gen_range(0..6);
            let a = [r.gen_range(-10.0..10.0)];
            let b = [r.gen_range(-10.0..10.0)];
            s.local_grad(i, &a, &mut ga);
            s.local_grad(i, &b, &mut gb);
            assert!((ga[0] - gb[0]).abs() <= l * (a[0] - b[0]).abs() * (1.0 + 1e-12));
        }
    }

    #[test]
    fn logistic_value_at_zero_is_log2() {
        let part = synthetic_classification_partition(3, 10, 4, PartitionStrategy::Iid, 2).unwrap();
        let s = ncvx_logistic_suite(part, 1e-4).unwrap();
        for i in 0..3 {
            assert!((s.local_value(i, &[0.0; 4]) - 2.0_f64.ln()).abs() < 1e-12);
        }
    }

    #[test]
    fn logistic_single_sample_gradient() {
        let shard = vec![vec![Sample { label: 1.0, features: vec![1.0, 0.0] }]];
        let part = DatasetPartition::new(shard, "manual").unwrap();
        let s = ncvx_logistic_suite(part, 0.0).unwrap();
        let mut g = [0.0, 0.0];
        s.local_grad(0, &[0.0, 0.0], &mut g);
        assert!((g[0] + 0.5).abs() < 1e-12);
        assert_eq!(g[1], 0.0);
        // single unit sample: L = 1/4
        assert!((s.l_smooth() - 0.25).abs() < 1e-12);
    }

    #[test]
    fn regularizer_gradient_closed_form() {
        let mut out = [0.0];
        add_regularizer_grad(&[1.0], 1e-4, &mut out);
        assert!((out[0] - 5e-5).abs() < 1e-18);
    }

    #[test]
    fn pl_estimate_on_pure_quadratic_is_two() {
        let mu = estimate_pl_constant(|x| x * x, |x| 2.0 * x, 0.0, -10.0, 10.0, 100_001).unwrap();
        assert!((mu - 2.0).abs() < 1e-6, "mu = {mu}");
    }

    #[test]
    fn pl_estimate_rejects_constant_function() {
        assert!(estimate_pl_constant(|_| 1.0, |_| 0.0, 1.0, -1.0, 1.0, 1000).is_err());
    }

    #[test]
    fn smoothness_probe_on_half_quadratic() {
        let l = estimate_smoothness(|x, g| g[0] = x[0], 1, -5.0, 5.0, 2000, 3).unwrap();
        assert!((l - 1.05).abs() < 1e-3, "L = {l}");
    }

    #[test]
    fn quadratic_suite_constants() {
        let s = quadratic_suite(16, 1.0).unwrap();
        assert_eq!(s.l_smooth(), 2.0);
        assert_eq!(s.mu(), Some(2.0));
        let expect: f64 = (0..16).map(|i| (i as f64 - 7.5) * (i as f64 - 7.5)).sum::<f64>() / 16.0;
        assert!((s.f_star().unwrap() - expect).abs() < 1e-12);
        assert!((s.global_value(&[0.0]) - expect).abs() < 1e-12);
    }

    #[test]
    fn label_sorted_two_nodes_pure() {
        let part = synthetic_classification_partition(2, 50, 3, PartitionStrategy::LabelSorted, 7).unwrap();
        assert!(part.shard(0).iter().all(|s| s.label == 1.0));
        assert!(part.shard(1).iter().all(|s| s.label == -1.0));
    }

    #[test]
    fn label_sorted_purity() {
        let part = synthetic_classification_partition(4, 100, 3, PartitionStrategy::LabelSorted, 7).unwrap();
        assert!(part.label_purity().iter().all(|&p| p >= 0.99));
    }

    #[test]
    fn iid_partition_is_deterministic() {
        let a = synthetic_classification_partition(4, 25, 3, PartitionStrategy::Iid, 9).unwrap();
        let b = synthetic_classification_partition(4, 25, 3, PartitionStrategy::Iid, 9).unwrap();
        for i in 0..4 {
            assert_eq!(a.shard(i), b.shard(i));
        }
    }

    #[test]
    fn dataset_parsing_and_mapping() {
        let text = "1,0.5,0.25\n0,-0.5,0.125\n1,0.1,0.2\n0,0.0,1.0\n";
        let samples = parse_dataset_text(text).unwrap();
        assert_eq!(samples.len(), 4);
        assert_eq!(samples[1].label, -1.0);
        let part = partition_samples(samples, 2, PartitionStrategy::Iid, 0).unwrap();
        assert_eq!(part.counts(), vec![2, 2]);
    }

    #[test]
    fn dataset_dimension_error_cites_line() {
        let text = "1,0.5,0.25\n-1,0.5\n";
        let err = parse_dataset_text(text).unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
    }
}
