//! Command-line front-end. Subcommands:
//!   run       execute an experiment (preset and/or config file plus flags)
//!   validate  resolve and check a config without running or writing
//!   topology  build a graph + weight matrix, report lambda, export files
//!   presets   list built-in presets
//!
//! Exit codes: 0 success, 1 config error, 2 divergence, 3 bound-check
//! failure.

use std::path::PathBuf;
use std::process::ExitCode;

use gtsim::error::{Error, Result};
use gtsim::harness::{config, presets, runner, RawConfig};
use gtsim::topology::validate_weight_matrix;

const USAGE: &str = "\
gtsim - decentralized stochastic gradient-tracking simulator

USAGE:
  gtsim run      [--preset NAME] [--config FILE] [--out DIR] [--quiet]
                 [--allow-divergence] [--<key> <value> ...]
  gtsim validate [--preset NAME] [--config FILE] [--<key> <value> ...]
  gtsim topology [--<topology key> <value> ...] [--out-graph FILE]
                 [--out-weights FILE]
  gtsim presets

Any configuration key may be overridden with `--key value`; see the config
format in the README (sections [topology] [suite] [oracle] [method]
[schedule] [run]). `GTSIM_THREADS` caps trial parallelism.

Examples:
  gtsim run --preset pl-constant --out runs/pl
  gtsim run --config exp.cfg --trials 50 --sigma 0.25 --out runs/sweep
  gtsim topology --family grid --rows 4 --cols 4 --out-weights w.csv
";

struct Cli {
    preset: Option<String>,
    config: Option<PathBuf>,
    out: PathBuf,
    quiet: bool,
    allow_divergence_flag: bool,
    out_graph: Option<PathBuf>,
    out_weights: Option<PathBuf>,
    overrides: Vec<(String, String)>,
}

fn parse_cli(args: &[String]) -> Result<Cli> {
    let mut cli = Cli {
        preset: None,
        config: None,
        out: PathBuf::from("gtsim_out"),
        quiet: false,
        allow_divergence_flag: false,
        out_graph: None,
        out_weights: None,
        overrides: Vec::new(),
    };
    let mut it = args.iter().peekable();
    while let Some(arg) = it.next() {
        let key = arg
            .strip_prefix("--")
            .ok_or_else(|| Error::Config(format!("expected a --flag, got {arg:?}")))?;
        match key {
            "quiet" => cli.quiet = true,
            "allow-divergence" => cli.allow_divergence_flag = true,
            _ => {
                let value = it
                    .next()
                    .ok_or_else(|| Error::Config(format!("flag --{key} needs a value")))?
                    .clone();
                match key {
                    "preset" => cli.preset = Some(value),
                    "config" => cli.config = Some(PathBuf::from(value)),
                    "out" => cli.out = PathBuf::from(value),
                    "out-graph" => cli.out_graph = Some(PathBuf::from(value)),
                    "out-weights" => cli.out_weights = Some(PathBuf::from(value)),
                    _ => cli.overrides.push((key.to_string(), value)),
                }
            }
        }
    }
    Ok(cli)
}

fn merged_config(cli: &Cli) -> Result<config::ExperimentConfig> {
    let mut raw = match &cli.preset {
        Some(name) => presets::expand(name)?,
        None => RawConfig::default(),
    };
    if let Some(path) = &cli.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        raw.merge_file_text(&text)?;
    }
    raw.merge_flags(&cli.overrides)?;
    if cli.allow_divergence_flag {
        raw.set("allow_divergence", "true")?;
    }
    config::typecheck(&raw)
}

fn cmd_run(cli: &Cli) -> Result<u8> {
    let cfg = merged_config(cli)?;
    let outcome = runner::run_experiment(&cfg, &cli.out, cli.quiet)?;
    if !cli.quiet {
        eprintln!(
            "wrote {} / {} / {} / {}",
            outcome.csv_path.display(),
            outcome.mean_csv_path.display(),
            outcome.bounds_path.display(),
            outcome.manifest_path.display()
        );
    }
    if !outcome.diverged_trials.is_empty() && !cfg.run.allow_divergence {
        for (label, trial, k) in &outcome.diverged_trials {
            eprintln!("divergence: {label} trial {trial} at iteration {k}");
        }
        return Ok(2);
    }
    if !outcome.all_bounds_pass {
        return Ok(3);
    }
    Ok(0)
}

fn cmd_validate(cli: &Cli) -> Result<u8> {
    let cfg = merged_config(cli)?;
    let res = runner::resolve(&cfg)?;
    println!("config ok");
    for t in &res.topologies {
        println!("topology {}: n = {}, lambda = {}", t.spec.name, t.spec.n, t.weights.lambda());
    }
    println!(
        "suite: n = {}, p = {}, L = {}, mu = {:?}, F* = {:?}",
        res.suite.n(),
        res.suite.p(),
        res.suite.l_smooth(),
        res.suite.mu(),
        res.suite.f_star()
    );
    for (label, sched) in &res.schedules {
        let rep = gtsim::algorithms::validate_schedule(
            sched,
            res.suite.l_smooth(),
            res.suite.mu(),
            res.lambda_max,
        )?;
        println!("schedule {label}: theory conditions {}", if rep.pass { "pass" } else { "FAIL" });
        for c in rep.checks {
            println!("  [{}] {},  {}", if c.pass { "ok" } else { "!!" }, c.name, c.detail);
        }
    }
    println!("iters = {}, trials = {}, seed = {}", res.iters, cfg.run.trials, cfg.run.seed);
    Ok(0)
}

fn cmd_topology(cli: &Cli) -> Result<u8> {
    let mut raw = RawConfig::default();
    raw.merge_flags(&cli.overrides)?;
    let cfg = config::typecheck(&raw)?;
    for spec in &cfg.topologies {
        let t = runner::build_topology(spec)?;
        let rep = validate_weight_matrix(t.weights.n(), t.weights.entries());
        println!(
            "{}: n = {}, lambda = {}, row_err = {:.3e}, col_err = {:.3e}, primitive = {}, pass = {}",
            t.spec.name,
            t.weights.n(),
            t.weights.lambda(),
            rep.row_sum_err,
            rep.col_sum_err,
            rep.primitive,
            rep.pass
        );
        if let Some(path) = &cli.out_graph {
            std::fs::write(path, t.graph.to_edge_list_string())?;
            println!("wrote {}", path.display());
        }
        if let Some(path) = &cli.out_weights {
            std::fs::write(path, t.weights.to_csv_string())?;
            println!("wrote {}", path.display());
        }
    }
    Ok(0)
}

fn cmd_presets() -> u8 {
    for p in &presets::PRESETS {
        println!("{:<14} {}", p.name, p.about);
    }
    0
}

fn dispatch() -> Result<u8> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    match args.first().map(String::as_str) {
        Some("run") => cmd_run(&parse_cli(&args[1..])?),
        Some("validate") => cmd_validate(&parse_cli(&args[1..])?),
        Some("topology") => cmd_topology(&parse_cli(&args[1..])?),
        Some("presets") => Ok(cmd_presets()),
        Some("-h") | Some("--help") | Some("help") | None => {
            print!("{USAGE}");
            Ok(0)
        }
        Some("--version") | Some("version") => {
            println!("gtsim {}", env!("CARGO_PKG_VERSION"));
            Ok(0)
        }
        Some(other) => Err(Error::Config(format!("unknown subcommand {other:?}; see --help"))),
    }
}

fn main() -> ExitCode {
    match dispatch() {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            let code = match e {
                Error::Diverged { .. } => 2,
                _ => 1,
            };
            ExitCode::from(code)
        }
    }
}
