//! Experiment configuration: a flat `key = value` format in sections
//! `[topology] [suite] [oracle] [method] [schedule] [run]`, merged from a
//! preset, an optional file, and `--key value` command-line overrides.
//! Unknown keys are errors; every key belongs to exactly one section.

use std::collections::BTreeMap;

use crate::algorithms::Method;
use crate::error::{Error, Result};
use crate::objectives::PartitionStrategy;

/// Default master seed when the config omits `seed` (recorded in the
/// manifest either way).
pub const DEFAULT_SEED: u64 = 42;

pub const SECTIONS: [&str; 6] = ["topology", "suite", "oracle", "method", "schedule", "run"];

/// key -> section registry; doubles as the unknown-key diagnostic.
pub const KEYS: [(&str, &str); 31] = [
    ("topology", "topology"),
    ("family", "topology"),
    ("n", "topology"),
    ("rows", "topology"),
    ("cols", "topology"),
    ("radius", "topology"),
    ("graph_seed", "topology"),
    ("weights", "topology"),
    ("suite", "suite"),
    ("hetero_scale", "suite"),
    ("offset_scale", "suite"),
    ("samples_per_node", "suite"),
    ("dim", "suite"),
    ("partition", "suite"),
    ("data_seed", "suite"),
    ("dataset", "suite"),
    ("regularizer", "suite"),
    ("oracle", "oracle"),
    ("sigma", "oracle"),
    ("batch", "oracle"),
    ("methods", "method"),
    ("centralized_batch", "method"),
    ("schedule", "schedule"),
    ("alpha", "schedule"),
    ("alphas", "schedule"),
    ("delta", "schedule"),
    ("phi", "schedule"),
    ("epsilon", "schedule"),
    ("epsilons", "schedule"),
    ("beta", "schedule"),
    ("gamma", "schedule"),
];

pub const RUN_KEYS: [&str; 12] = [
    "iters",
    "trials",
    "seed",
    "metric_stride",
    "snapshot_stride",
    "state_csv",
    "x0",
    "bounds",
    "allow_divergence",
    "parallelism",
    "rate_window_lo",
    "rate_window_hi",
];

fn section_of(key: &str) -> Option<&'static str> {
    KEYS.iter().find(|(k, _)| *k == key).map(|(_, s)| *s).or_else(|| {
        RUN_KEYS.contains(&key).then_some("run")
    })
}

fn known_keys() -> Vec<&'static str> {
    KEYS.iter().map(|(k, _)| *k).chain(RUN_KEYS).collect()
}

/// Raw merged key/value view, before typing.
#[derive(Debug, Clone, Default)]
pub struct RawConfig {
    pub values: BTreeMap<String, String>,
}

impl RawConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        if section_of(key).is_none() {
            return Err(Error::Config(format!(
                "unknown key {key:?}; accepted keys: {}",
                known_keys().join(", ")
            )));
        }
        self.values.insert(key.to_string(), value.to_string());
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(|s| s.as_str())
    }

    /// Parse the sectioned `key = value` file format into this config.
    pub fn merge_file_text(&mut self, text: &str) -> Result<()> {
        let mut section: Option<String> = None;
        for (ln, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
                if !SECTIONS.contains(&name) {
                    return Err(Error::Config(format!(
                        "line {}: unknown section [{name}]; accepted: {}",
                        ln + 1,
                        SECTIONS.join(", ")
                    )));
                }
                section = Some(name.to_string());
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected `key = value`, got {line:?}", ln + 1))
            })?;
            let (key, value) = (key.trim(), value.trim());
            let sec = section_of(key).ok_or_else(|| {
                Error::Config(format!(
                    "line {}: unknown key {key:?}; accepted keys: {}",
                    ln + 1,
                    known_keys().join(", ")
                ))
            })?;
            match &section {
                Some(s) if s == sec => {}
                Some(s) => {
                    return Err(Error::Config(format!(
                        "line {}: key {key:?} belongs to section [{sec}], found in [{s}]",
                        ln + 1
                    )))
                }
                None => {
                    return Err(Error::Config(format!(
                        "line {}: key {key:?} appears before any [section] header",
                        ln + 1
                    )))
                }
            }
            self.set(key, value)?;
        }
        Ok(())
    }

    /// Apply `--key value` style overrides.
    pub fn merge_flags(&mut self, flags: &[(String, String)]) -> Result<()> {
        for (k, v) in flags {
            self.set(k, v)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Exponential,
    Grid,
    Geometric,
    Complete,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightRule {
    Auto,
    Equal,
    Metropolis,
    LazyMetropolis,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct TopologySpec {
    pub name: String,
    pub family: Family,
    pub n: usize,
    pub rows: usize,
    pub cols: usize,
    pub radius: Option<f64>,
    pub graph_seed: u64,
    pub weights: WeightRule,
}

impl TopologySpec {
    fn named(name: &str) -> Result<Self> {
        let spec = |family, n, rows, cols| TopologySpec {
            name: name.to_string(),
            family,
            n,
            rows,
            cols,
            radius: None,
            graph_seed: 7,
            weights: WeightRule::Auto,
        };
        match name {
            "exp16" => Ok(spec(Family::Exponential, 16, 0, 0)),
            "grid4x4" => Ok(spec(Family::Grid, 16, 4, 4)),
            "geom100" => Ok(spec(Family::Geometric, 100, 0, 0)),
            "complete16" => Ok(spec(Family::Complete, 16, 0, 0)),
            other => Err(Error::Config(format!(
                "unknown named topology {other:?} (accepted: exp16, grid4x4, geom100, complete16)"
            ))),
        }
    }
}

#[derive(Debug, Clone, serde::Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SuiteSpec {
    PlSynthetic { hetero_scale: f64 },
    Quadratic { offset_scale: f64 },
    NcvxLogistic {
        dataset: Option<String>,
        samples_per_node: usize,
        dim: usize,
        partition: String,
        data_seed: u64,
        regularizer: f64,
    },
}

#[derive(Debug, Clone, serde::Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OracleSpec {
    Gaussian { sigma: f64 },
    Sampling { batch: usize },
}

/// A step value that may reference the theory maxima, resolved once the
/// suite constants are known.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub enum AlphaSpec {
    Value(f64),
    /// `stable_pl * factor`
    StablePl(f64),
    /// `stable_ncvx * factor`
    StableNcvx(f64),
    /// `sqrt(n / iters)`, the finite-horizon tuning.
    Corollary1,
}

impl AlphaSpec {
    fn parse(s: &str) -> Result<Self> {
        let parse_factor = |rest: &str, key: &str| -> Result<f64> {
            if rest.is_empty() {
                Ok(1.0)
            } else {
                rest.strip_prefix('*')
                    .and_then(|f| f.trim().parse::<f64>().ok())
                    .ok_or_else(|| Error::Config(format!("bad step spec {key:?}{rest:?}")))
            }
        };
        if let Some(rest) = s.strip_prefix("stable_pl") {
            return Ok(AlphaSpec::StablePl(parse_factor(rest, "stable_pl")?));
        }
        if let Some(rest) = s.strip_prefix("stable_ncvx") {
            return Ok(AlphaSpec::StableNcvx(parse_factor(rest, "stable_ncvx")?));
        }
        if s == "corollary1" {
            return Ok(AlphaSpec::Corollary1);
        }
        s.parse::<f64>()
            .map(AlphaSpec::Value)
            .map_err(|_| Error::Config(format!("bad alpha value {s:?} (number, stable_pl[*f], stable_ncvx[*f], corollary1)")))
    }
}

#[derive(Debug, Clone, serde::Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScheduleSpec {
    Constant { alpha: AlphaSpec },
    /// `delta`/`phi` None means the theory-prescribed values
    /// (`delta = 6/mu`, `phi` at its lower bound).
    PolyDecay { delta: Option<f64>, phi: Option<f64>, epsilon: f64 },
    /// `beta`/`gamma` None means the Corollary-2 parameterization.
    Harmonic { beta: Option<f64>, gamma: Option<f64> },
}

#[derive(Debug, Clone, Copy, serde::Serialize)]
pub enum ItersSpec {
    Value(u64),
    /// Ceiling of the explicit finite-horizon precondition (worst topology).
    AutoTransient,
}

#[derive(Debug, Clone, Copy, serde::Serialize)]
pub enum X0Spec {
    Constant(f64),
    /// Drawn once per trial from the trial stream, replicated across nodes.
    Gaussian(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundsMode {
    Auto,
    Off,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct RunSpec {
    pub iters: ItersSpec,
    pub trials: u64,
    pub seed: u64,
    pub metric_stride: u64,
    pub snapshot_stride: u64,
    pub state_csv: bool,
    pub x0: X0Spec,
    pub bounds: BoundsMode,
    pub allow_divergence: bool,
    pub parallelism: Option<usize>,
    pub rate_window: (u64, u64),
}

/// Fully typed experiment description (still unresolved: graphs not built,
/// theory-referencing steps not evaluated).
#[derive(Debug, Clone, serde::Serialize)]
pub struct ExperimentConfig {
    pub topologies: Vec<TopologySpec>,
    pub suite: SuiteSpec,
    pub oracle: OracleSpec,
    pub methods: Vec<Method>,
    pub schedules: Vec<ScheduleSpec>,
    pub run: RunSpec,
    /// The merged raw keys, echoed into the manifest.
    pub raw: BTreeMap<String, String>,
}

fn parse_num<T: std::str::FromStr>(raw: &RawConfig, key: &str, default: T) -> Result<T> {
    match raw.get(key) {
        None => Ok(default),
        Some(v) => v
            .parse::<T>()
            .map_err(|_| Error::Config(format!("key {key:?}: cannot parse {v:?}"))),
    }
}

fn parse_bool(raw: &RawConfig, key: &str, default: bool) -> Result<bool> {
    match raw.get(key) {
        None => Ok(default),
        Some("true") => Ok(true),
        Some("false") => Ok(false),
        Some(v) => Err(Error::Config(format!("key {key:?}: expected true|false, got {v:?}"))),
    }
}

fn parse_topologies(raw: &RawConfig) -> Result<Vec<TopologySpec>> {
    if let Some(named) = raw.get("topology") {
        if raw.get("family").is_some() {
            return Err(Error::Config("give either `topology` (named) or `family` (custom), not both".into()));
        }
        return named.split(',').map(|t| TopologySpec::named(t.trim())).collect();
    }
    let family = match raw.get("family").unwrap_or("exponential") {
        "exponential" => Family::Exponential,
        "grid" => Family::Grid,
        "geometric" => Family::Geometric,
        "complete" => Family::Complete,
        other => {
            return Err(Error::Config(format!(
                "unknown family {other:?} (accepted: exponential, grid, geometric, complete)"
            )))
        }
    };
    let rows = parse_num(raw, "rows", 4usize)?;
    let cols = parse_num(raw, "cols", 4usize)?;
    let n = match family {
        Family::Grid => parse_num(raw, "n", rows * cols)?,
        _ => parse_num(raw, "n", 16usize)?,
    };
    let radius = match raw.get("radius") {
        None | Some("auto") => None,
        Some(v) => Some(
            v.parse::<f64>()
                .map_err(|_| Error::Config(format!("key \"radius\": cannot parse {v:?}")))?,
        ),
    };
    let weights = match raw.get("weights").unwrap_or("auto") {
        "auto" => WeightRule::Auto,
        "equal" => WeightRule::Equal,
        "metropolis" => WeightRule::Metropolis,
        "lazy_metropolis" => WeightRule::LazyMetropolis,
        other => {
            return Err(Error::Config(format!(
                "unknown weights rule {other:?} (accepted: auto, equal, metropolis, lazy_metropolis)"
            )))
        }
    };
    let name = match family {
        Family::Exponential => format!("exp{n}"),
        Family::Grid => format!("grid{rows}x{cols}"),
        Family::Geometric => format!("geom{n}"),
        Family::Complete => format!("complete{n}"),
    };
    Ok(vec![TopologySpec {
        name,
        family,
        n,
        rows,
        cols,
        radius,
        graph_seed: parse_num(raw, "graph_seed", 7u64)?,
        weights,
    }])
}

fn parse_suite(raw: &RawConfig) -> Result<SuiteSpec> {
    match raw.get("suite").unwrap_or("pl_synthetic") {
        "pl_synthetic" => Ok(SuiteSpec::PlSynthetic { hetero_scale: parse_num(raw, "hetero_scale", 1.0)? }),
        "quadratic" => Ok(SuiteSpec::Quadratic { offset_scale: parse_num(raw, "offset_scale", 1.0)? }),
        "ncvx_logistic" => {
            let partition = raw.get("partition").unwrap_or("iid").to_string();
            PartitionStrategy::parse(&partition)?;
            Ok(SuiteSpec::NcvxLogistic {
                dataset: raw.get("dataset").map(|s| s.to_string()),
                samples_per_node: parse_num(raw, "samples_per_node", 200usize)?,
                dim: parse_num(raw, "dim", 5usize)?,
                partition,
                data_seed: parse_num(raw, "data_seed", 11u64)?,
                regularizer: parse_num(raw, "regularizer", 1e-4)?,
            })
        }
        other => Err(Error::Config(format!(
            "unknown suite {other:?} (accepted: pl_synthetic, ncvx_logistic, quadratic)"
        ))),
    }
}

fn parse_oracle(raw: &RawConfig) -> Result<OracleSpec> {
    match raw.get("oracle").unwrap_or("gaussian") {
        "gaussian" => Ok(OracleSpec::Gaussian { sigma: parse_num(raw, "sigma", 0.5)? }),
        "exact" => Ok(OracleSpec::Gaussian { sigma: 0.0 }),
        "sampling" => Ok(OracleSpec::Sampling { batch: parse_num(raw, "batch", 1usize)? }),
        other => Err(Error::Config(format!(
            "unknown oracle {other:?} (accepted: gaussian, exact, sampling)"
        ))),
    }
}

fn parse_schedules(raw: &RawConfig) -> Result<Vec<ScheduleSpec>> {
    let kind = raw.get("schedule").unwrap_or("constant");
    match kind {
        "constant" => {
            let specs: Vec<AlphaSpec> = match (raw.get("alphas"), raw.get("alpha")) {
                (Some(list), _) => list
                    .split(',')
                    .map(|t| AlphaSpec::parse(t.trim()))
                    .collect::<Result<_>>()?,
                (None, Some(a)) => vec![AlphaSpec::parse(a)?],
                (None, None) => vec![AlphaSpec::StablePl(1.0)],
            };
            Ok(specs.into_iter().map(|alpha| ScheduleSpec::Constant { alpha }).collect())
        }
        "poly_decay" => {
            let eps: Vec<f64> = match (raw.get("epsilons"), raw.get("epsilon")) {
                (Some(list), _) => list
                    .split(',')
                    .map(|t| t.trim().parse::<f64>().map_err(|_| Error::Config(format!("bad epsilon {t:?}"))))
                    .collect::<Result<_>>()?,
                (None, Some(e)) => vec![e
                    .parse::<f64>()
                    .map_err(|_| Error::Config(format!("bad epsilon {e:?}")))?],
                (None, None) => vec![1.0],
            };
            for &e in &eps {
                if !(e > 0.5 && e <= 1.0) {
                    return Err(Error::Config(format!("epsilon must lie in (0.5, 1], got {e}")));
                }
            }
            let delta = raw.get("delta").filter(|v| *v != "auto").map(|v| v.parse::<f64>())
                .transpose()
                .map_err(|_| Error::Config("bad delta".into()))?;
            let phi = raw.get("phi").filter(|v| *v != "auto").map(|v| v.parse::<f64>())
                .transpose()
                .map_err(|_| Error::Config("bad phi".into()))?;
            Ok(eps.into_iter().map(|epsilon| ScheduleSpec::PolyDecay { delta, phi, epsilon }).collect())
        }
        "harmonic" => {
            let beta = raw.get("beta").filter(|v| *v != "auto").map(|v| v.parse::<f64>())
                .transpose()
                .map_err(|_| Error::Config("bad beta".into()))?;
            let gamma = raw.get("gamma").filter(|v| *v != "auto").map(|v| v.parse::<f64>())
                .transpose()
                .map_err(|_| Error::Config("bad gamma".into()))?;
            Ok(vec![ScheduleSpec::Harmonic { beta, gamma }])
        }
        other => Err(Error::Config(format!(
            "unknown schedule {other:?} (accepted: constant, poly_decay, harmonic)"
        ))),
    }
}

/// Type and validate the merged raw keys.
pub fn typecheck(raw: &RawConfig) -> Result<ExperimentConfig> {
    let topologies = parse_topologies(raw)?;
    let suite = parse_suite(raw)?;
    let oracle = parse_oracle(raw)?;
    if matches!(oracle, OracleSpec::Sampling { .. }) && !matches!(suite, SuiteSpec::NcvxLogistic { .. }) {
        return Err(Error::Config("the sampling oracle needs a finite-sum suite (ncvx_logistic)".into()));
    }
    let methods: Vec<Method> = raw
        .get("methods")
        .unwrap_or("gt_dsgd")
        .split(',')
        .map(|t| Method::parse(t.trim()))
        .collect::<Result<_>>()?;
    if methods.is_empty() {
        return Err(Error::Config("need at least one method".into()));
    }
    let schedules = parse_schedules(raw)?;
    let iters = match raw.get("iters") {
        None => ItersSpec::Value(10_000),
        Some("auto") => ItersSpec::AutoTransient,
        Some(v) => ItersSpec::Value(
            v.parse::<u64>().map_err(|_| Error::Config(format!("key \"iters\": cannot parse {v:?}")))?,
        ),
    };
    let x0 = match raw.get("x0") {
        None => X0Spec::Constant(0.5),
        Some(v) => match v.strip_prefix("gauss:") {
            Some(std) => X0Spec::Gaussian(
                std.parse::<f64>().map_err(|_| Error::Config(format!("bad x0 spec {v:?}")))?,
            ),
            None => X0Spec::Constant(
                v.parse::<f64>().map_err(|_| Error::Config(format!("bad x0 spec {v:?}")))?,
            ),
        },
    };
    let bounds = match raw.get("bounds").unwrap_or("auto") {
        "auto" => BoundsMode::Auto,
        "off" => BoundsMode::Off,
        other => return Err(Error::Config(format!("key \"bounds\": expected auto|off, got {other:?}"))),
    };
    let trials = parse_num(raw, "trials", 1u64)?;
    if trials == 0 {
        return Err(Error::Config("trials must be >= 1".into()));
    }
    let metric_stride = parse_num(raw, "metric_stride", 1u64)?.max(1);
    let run = RunSpec {
        iters,
        trials,
        seed: parse_num(raw, "seed", DEFAULT_SEED)?,
        metric_stride,
        snapshot_stride: parse_num(raw, "snapshot_stride", 100u64)?.max(1),
        state_csv: parse_bool(raw, "state_csv", false)?,
        x0,
        bounds,
        allow_divergence: parse_bool(raw, "allow_divergence", false)?,
        parallelism: match raw.get("parallelism") {
            None => None,
            Some(v) => Some(
                v.parse::<usize>()
                    .map_err(|_| Error::Config(format!("key \"parallelism\": cannot parse {v:?}")))?,
            ),
        },
        rate_window: (
            parse_num(raw, "rate_window_lo", 1_000u64)?,
            parse_num(raw, "rate_window_hi", 100_000u64)?,
        ),
    };
    Ok(ExperimentConfig {
        topologies,
        suite,
        oracle,
        methods,
        schedules,
        run,
        raw: raw.values.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_key_is_rejected() {
        let mut raw = RawConfig::default();
        let err = raw.set("sigmaa", "0.5").unwrap_err();
        assert!(err.to_string().contains("unknown key"));
    }

    #[test]
    fn file_sections_are_enforced() {
        let mut raw = RawConfig::default();
        let err = raw.merge_file_text("[topology]\nsigma = 0.5\n").unwrap_err();
        assert!(err.to_string().contains("belongs to section [oracle]"), "{err}");
        raw.merge_file_text("[oracle]\nsigma = 0.25\n").unwrap();
        assert_eq!(raw.get("sigma"), Some("0.25"));
    }

    #[test]
    fn defaults_resolve() {
        let cfg = typecheck(&RawConfig::default()).unwrap();
        assert_eq!(cfg.run.seed, DEFAULT_SEED);
        assert_eq!(cfg.topologies[0].name, "exp16");
        assert!(matches!(cfg.suite, SuiteSpec::PlSynthetic { .. }));
        assert!(matches!(cfg.schedules[0], ScheduleSpec::Constant { .. }));
    }

    #[test]
    fn epsilon_out_of_range_rejected_at_parse() {
        let mut raw = RawConfig::default();
        raw.merge_file_text("[schedule]\nschedule = poly_decay\nepsilon = 0.4\n").unwrap();
        let err = typecheck(&raw).unwrap_err();
        assert!(err.to_string().contains("(0.5, 1]"), "{err}");
    }

    #[test]
    fn alpha_specs_parse() {
        assert!(matches!(AlphaSpec::parse("0.01").unwrap(), AlphaSpec::Value(v) if v == 0.01));
        assert!(matches!(AlphaSpec::parse("stable_pl").unwrap(), AlphaSpec::StablePl(f) if f == 1.0));
        assert!(matches!(AlphaSpec::parse("stable_pl*0.5").unwrap(), AlphaSpec::StablePl(f) if f == 0.5));
        assert!(matches!(AlphaSpec::parse("stable_ncvx*0.5").unwrap(), AlphaSpec::StableNcvx(f) if f == 0.5));
        assert!(matches!(AlphaSpec::parse("corollary1").unwrap(), AlphaSpec::Corollary1));
        assert!(AlphaSpec::parse("fast").is_err());
    }

    #[test]
    fn named_topology_list() {
        let mut raw = RawConfig::default();
        raw.set("topology", "exp16,grid4x4").unwrap();
        let cfg = typecheck(&raw).unwrap();
        assert_eq!(cfg.topologies.len(), 2);
        assert_eq!(cfg.topologies[1].name, "grid4x4");
    }

    #[test]
    fn sampling_oracle_needs_finite_sum() {
        let mut raw = RawConfig::default();
        raw.set("oracle", "sampling").unwrap();
        let err = typecheck(&raw).unwrap_err();
        assert!(err.to_string().contains("finite-sum"));
    }
}
