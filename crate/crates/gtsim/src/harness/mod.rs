//! Experiment front-end: configuration, presets, the Monte Carlo runner,
//! and file outputs (metrics CSV, trial means, bound report, manifest).

pub mod config;
pub mod output;
pub mod presets;
pub mod runner;

pub use config::{ExperimentConfig, RawConfig, DEFAULT_SEED};
pub use presets::{expand as expand_preset, PRESETS};
pub use runner::{
    load_dataset, resolve, run_experiment, run_trials_parallel, run_trials_sequential,
    trial_parallelism, ExperimentOutcome,
};

use config::Family;
use serde::Serialize;
use std::collections::BTreeMap;

/// Everything needed to replay a run bit-identically, plus the resolved
/// constants the bound evaluators used. Wall-clock and creation time are
/// the only non-reproducible fields, and they live only here.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub artifact_version: String,
    pub created_unix_ms: u128,
    pub config: BTreeMap<String, String>,
    pub topologies: Vec<TopologyManifest>,
    pub suite: SuiteManifest,
    pub nu_a_sq: f64,
    pub schedules: Vec<ScheduleManifest>,
    pub iters: u64,
    /// Effective data passes per node for finite-sum suites.
    pub epochs: Option<f64>,
    pub trials: u64,
    pub master_seed: u64,
    pub trial_seeds: Vec<u64>,
    pub threads: usize,
    pub wall_clock_ms: u128,
    pub notes: Vec<String>,
}

#[derive(Debug, Serialize)]
pub struct TopologyManifest {
    pub name: String,
    pub family: Family,
    pub n: usize,
    pub lambda: f64,
}

#[derive(Debug, Serialize)]
pub struct SuiteManifest {
    pub kind: String,
    pub n: usize,
    pub p: usize,
    pub l_smooth: f64,
    pub mu: Option<f64>,
    pub f_star: Option<f64>,
    pub dataset_counts: Option<Vec<usize>>,
}

#[derive(Debug, Serialize)]
pub struct ScheduleManifest {
    pub label: String,
    pub theory_conditions_pass: bool,
}
