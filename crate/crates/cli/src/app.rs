//! Command-line surface.

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use throughput_core::sim::SimConfig;
use throughput_core::sinr::SinrStrategy;

use crate::config::{RMaxSpec, RunConfig, SimSpec};
use crate::figures::preset;
use crate::run::{compute, simulate, validate, RunOptions, Table};

#[derive(Debug, Parser)]
#[command(
    name = "throughput",
    version,
    about = "Local throughput of a link in a Poisson field of interferers"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// JSON run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Master seed of the simulation.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Simulation trials per point; also requests simulation columns.
    #[arg(long, global = true)]
    pub trials: Option<usize>,

    /// Truncation radius of the simulated field, or `auto`.
    #[arg(long, global = true, value_parser = RMaxSpec::parse)]
    pub rmax: Option<throughput_core::sim::RMax>,

    /// Evaluation path of the SINR analysis.
    #[arg(long, global = true, value_enum, default_value_t = Strategy::Auto)]
    pub strategy: Strategy,

    /// Offset added to analytic values before validation.
    #[arg(
        long,
        global = true,
        hide = true,
        default_value_t = 0.0,
        allow_negative_numbers = true
    )]
    pub perturb_analytic: f64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Analytic throughput at one point or over a sweep.
    Compute,
    /// Monte Carlo throughput only.
    Simulate,
    /// Analytic and Monte Carlo side by side, with z-scores.
    Validate,
    /// Data of a published figure as CSV.
    Figure {
        /// One of 4, 6, 7, 8, 9, 10.
        number: u8,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Strategy {
    Auto,
    #[value(name = "closed_form")]
    ClosedForm,
    Generic,
}

impl From<Strategy> for SinrStrategy {
    fn from(s: Strategy) -> Self {
        match s {
            Strategy::Auto => SinrStrategy::Auto,
            Strategy::ClosedForm => SinrStrategy::ClosedForm,
            Strategy::Generic => SinrStrategy::Generic,
        }
    }
}

impl Cli {
    fn load(&self) -> Result<RunConfig> {
        let Some(path) = &self.config else {
            bail!("--config <path> is required for this command");
        };
        let text =
            fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        RunConfig::from_json(&text).with_context(|| format!("in {}", path.display()))
    }

    /// Simulation settings from the config section and the flags; `None` when
    /// neither asks for simulation.
    fn sim(&self, section: Option<&SimSpec>) -> Option<SimConfig> {
        if section.is_none() && self.trials.is_none() {
            return None;
        }
        let mut sim = section.cloned().unwrap_or_default().build();
        if let Some(t) = self.trials {
            sim.trials = t;
        }
        if let Some(s) = self.seed {
            sim.master_seed = s;
        }
        if let Some(r) = self.rmax {
            sim.r_max = r;
        }
        Some(sim)
    }

    fn options(&self, section: Option<&SimSpec>) -> RunOptions {
        RunOptions {
            strategy: self.strategy.into(),
            sim: self.sim(section),
            perturb_analytic: self.perturb_analytic,
        }
    }

    fn emit(&self, fallback: Option<&PathBuf>, text: &str) -> Result<()> {
        match self.out.as_ref().or(fallback) {
            Some(path) => {
                fs::write(path, text).with_context(|| format!("writing {}", path.display()))
            }
            None => {
                let mut stdout = std::io::stdout().lock();
                stdout
                    .write_all(text.as_bytes())
                    .context("writing to standard output")
            }
        }
    }
}

/// Runs one command. `Ok(false)` means a validation run failed.
pub fn execute(cli: &Cli) -> Result<bool> {
    match &cli.command {
        Command::Compute => {
            let cfg = cli.load()?;
            let table = compute(&cfg, &cli.options(cfg.sim.as_ref()))?;
            cli.emit(cfg.output.as_ref(), &table.to_csv())?;
            Ok(true)
        }
        Command::Simulate => {
            let cfg = cli.load()?;
            let mut opts = cli.options(cfg.sim.as_ref());
            opts.sim
                .get_or_insert_with(|| cli.sim(Some(&SimSpec::default())).expect("section given"));
            let table = simulate(&cfg, &opts)?;
            cli.emit(cfg.output.as_ref(), &table.to_csv())?;
            Ok(true)
        }
        Command::Validate => {
            let cfg = cli.load()?;
            let report = validate(&cfg, &cli.options(cfg.sim.as_ref()))?;
            cli.emit(cfg.output.as_ref(), &report.render())?;
            Ok(report.pass)
        }
        Command::Figure { number } => {
            let opts = cli.options(None);
            let mut combined: Option<Table> = None;
            for (label, cfg) in preset(*number)? {
                let t = compute(&cfg, &opts)?.with_series(&label);
                match &mut combined {
                    None => combined = Some(t),
                    Some(c) => c.rows.extend(t.rows),
                }
            }
            let table = combined.expect("every preset has a series");
            cli.emit(None, &table.to_csv())?;
            Ok(true)
        }
    }
}
