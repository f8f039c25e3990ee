//! Simulation library for decentralized stochastic optimization with
//! gradient tracking over fixed mixing networks.
//!
//! The crate provides:
//! - graph families and doubly-stochastic weight constructions with their
//!   connectivity constant `lambda` ([`topology`]);
//! - objective suites with exact gradients and smoothness/PL constants
//!   ([`objectives`]);
//! - unbiased stochastic gradient oracles with per-node streams
//!   ([`oracles`]);
//! - the gradient-tracking method, the plain decentralized baseline, and a
//!   centralized minibatch comparator with step-size schedules
//!   ([`algorithms`]);
//! - closed-form convergence-bound evaluators, spectral checks, and
//!   measurement-vs-theory comparisons ([`analysis`]);
//! - an experiment harness with presets, Monte Carlo trials, and CSV
//!   outputs ([`harness`]).
//!
//! Monte Carlo trials run data-parallel through rayon by default; build
//! with `--no-default-features` for a fully sequential binary.

pub mod algorithms;
pub mod analysis;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod objectives;
pub mod oracles;
pub mod rng;
pub mod topology;

pub use error::{Error, Result};
