//! Command-line definition and dispatch for the `zeno` binary.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::manifest::{ExperimentManifest, Mode, Overrides};
use crate::plot::{cmd_plot, PlotKind};
use crate::problem::build_problem;
use crate::run::{cmd_run, MAX_FILTER_BAND};
use crate::sweep::{cmd_sweep, Axis};
use crate::verify::{cmd_verify, Suite, VerifyOptions};
use crate::window::cmd_window;

/// Environment variable capping the worker pool size.
pub const THREADS_ENV: &str = "ZENO_THREADS";

#[derive(Debug, Parser)]
#[command(name = "zeno", version, about = "Randomised dephasing schedules for eigenpath traversal")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one experiment manifest.
    Run(RunArgs),
    /// Run a manifest over a range of one parameter and fit the cost.
    Sweep(SweepArgs),
    /// Run a fixed battery of invariant checks.
    Verify(VerifyArgs),
    /// Render a trace, sweep or window CSV as SVG.
    Plot(PlotArgs),
    /// Design a filter window and write its taps.
    Window(WindowArgs),
}

#[derive(Debug, Args)]
pub struct OverrideArgs {
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    #[arg(long)]
    pub trajectories: Option<usize>,
    #[arg(long, value_enum)]
    pub mode: Option<Mode>,
    /// Switch to the adaptive schedule with this exponent.
    #[arg(long)]
    pub q: Option<f64>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Enable eigenstate filtering to this infidelity.
    #[arg(long)]
    pub filter_epsilon: Option<f64>,
}

impl OverrideArgs {
    fn overrides(&self) -> Overrides {
        Overrides {
            seed: self.seed,
            out_dir: self.out_dir.clone(),
            trajectories: self.trajectories,
            mode: self.mode,
            q: self.q,
            epsilon: self.epsilon,
            filter_epsilon: self.filter_epsilon,
        }
    }
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    #[command(flatten)]
    pub overrides: OverrideArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Template manifest; the swept field is replaced at each point.
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long, value_enum)]
    pub axis: Axis,
    #[arg(long, value_delimiter = ',', required = true)]
    pub values: Vec<f64>,
    #[command(flatten)]
    pub overrides: OverrideArgs,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value = "all")]
    pub suite: Suite,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub trajectories: Option<usize>,
    #[arg(long, default_value = "out")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    pub input: PathBuf,
    #[arg(long, value_enum)]
    pub kind: PlotKind,
    /// Defaults to the directory holding the input.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct WindowArgs {
    /// Stop-band edge; taken from the manifest's problem when omitted.
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub filter_epsilon: Option<f64>,
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    #[arg(long, default_value = "out")]
    pub out_dir: PathBuf,
}

fn load(path: &Path, o: &OverrideArgs) -> Result<ExperimentManifest> {
    let mut m = ExperimentManifest::load(path)?;
    m.apply(&o.overrides())?;
    Ok(m)
}

fn window(a: &WindowArgs) -> Result<i32> {
    let manifest = a.manifest.as_ref().map(|p| ExperimentManifest::load(p)).transpose()?;
    let eps = a
        .filter_epsilon
        .or(a.epsilon)
        .or_else(|| manifest.as_ref().and_then(|m| m.filter.map(|f| f.epsilon)))
        .context("no target: pass --filter-epsilon or a manifest with a filter")?;
    let delta = match (a.delta, &manifest) {
        (Some(d), _) => d,
        (None, Some(m)) => build_problem(&m.problem)?.gap.delta_m.min(MAX_FILTER_BAND),
        (None, None) => bail!("no stop-band edge: pass --delta or --manifest"),
    };
    cmd_window(delta, eps, &a.out_dir)
}

/// Executes a parsed command and returns the process exit code.
pub fn dispatch(cli: &Cli) -> Result<i32> {
    match &cli.command {
        Command::Run(a) => cmd_run(&load(&a.manifest, &a.overrides)?),
        Command::Sweep(a) => cmd_sweep(&load(&a.manifest, &a.overrides)?, a.axis, &a.values),
        Command::Verify(a) => {
            let mut opts = VerifyOptions::default();
            if let Some(s) = a.seed {
                opts.seed = s;
            }
            if let Some(t) = a.trajectories {
                if t < 2 {
                    bail!("verify needs at least 2 trajectories, got {t}");
                }
                opts.trajectories = t;
            }
            cmd_verify(a.suite, &opts, &a.out_dir)
        }
        Command::Plot(a) => {
            let path = cmd_plot(&a.input, a.kind, a.out_dir.as_deref())?;
            println!("wrote {}", path.display());
            Ok(0)
        }
        Command::Window(a) => window(a),
    }
}

/// Sizes the global worker pool from `ZENO_THREADS` when it is set.
pub fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .with_context(|| format!("{THREADS_ENV} must be a positive integer, got `{raw}`"))?;
    if n == 0 {
        bail!("{THREADS_ENV} must be a positive integer, got 0");
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .context("configuring the worker pool")
}

#[derive(Serialize)]
struct ErrorReport {
    error: String,
    causes: Vec<String>,
}

/// Machine-readable rendering of an error chain.
pub fn error_json(err: &anyhow::Error) -> String {
    let report = ErrorReport {
        error: err.to_string(),
        causes: err.chain().skip(1).map(|c| c.to_string()).collect(),
    };
    serde_json::to_string(&report).unwrap_or_else(|_| format!("{{\"error\":{:?}}}", err.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn sweep_values_split_on_commas() {
        let cli = Cli::try_parse_from([
            "zeno", "sweep", "--manifest", "m.json", "--axis", "grover-N", "--values", "64,256,1024,4096",
        ])
        .unwrap();
        let Command::Sweep(a) = cli.command else { panic!("wrong subcommand") };
        assert_eq!(a.values, [64.0, 256.0, 1024.0, 4096.0]);
        assert_eq!(a.axis, Axis::GroverN);
    }

    #[test]
    fn suites_use_their_interface_names() {
        let cli = Cli::try_parse_from(["zeno", "verify", "--suite", "lemma15"]).unwrap();
        let Command::Verify(a) = cli.command else { panic!("wrong subcommand") };
        assert_eq!(a.suite, Suite::PerturbedConjugation);
    }

    #[test]
    fn error_chain_is_json() {
        let e = anyhow::anyhow!("inner").context("outer");
        let v: serde_json::Value = serde_json::from_str(&error_json(&e)).unwrap();
        assert_eq!(v["error"], "outer");
        assert_eq!(v["causes"][0], "inner");
    }
}
