//! Evaluation of a configuration over its sweep.

use throughput_core::connectivity::{
    connectivity_throughput, mean_audible_nodes, normalized_audible_nodes,
};
use throughput_core::model::{DutyMomentMode, PropagationModel, Scenario, TrafficModel};
use throughput_core::sim::{
    simulate_audible_count, simulate_connectivity_throughput, simulate_sinr_throughput, SimConfig,
    SimEstimate, Truncation,
};
use throughput_core::sinr::{sinr_throughput_with, SinrOptions, SinrStrategy};

use crate::config::{Analysis, RunConfig};
use crate::error::CliError;
use crate::format::{exact, sig9};
use crate::sweep::grid;

/// Largest |z| accepted by `validate`.
pub const Z_LIMIT: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOptions {
    pub strategy: SinrStrategy,
    /// Monte Carlo settings; `None` runs the analysis only.
    pub sim: Option<SimConfig>,
    /// Added to every analytic value before validation; a harness self-test hook.
    pub perturb_analytic: f64,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            strategy: SinrStrategy::Auto,
            sim: None,
            perturb_analytic: 0.0,
        }
    }
}

/// A CSV document held in memory.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    /// Prepends a constant `series` column.
    pub fn with_series(mut self, label: &str) -> Self {
        self.header.insert(0, "series".into());
        for row in &mut self.rows {
            row.insert(0, label.to_string());
        }
        self
    }
}

struct Point {
    x: f64,
    label: String,
    scenario: Scenario<f64>,
    model: PropagationModel<f64>,
    traffic: TrafficModel<f64>,
    duty_mode: DutyMomentMode,
}

impl Point {
    fn fail(&self, source: throughput_core::error::Error) -> CliError {
        CliError::Model {
            point: self.label.clone(),
            cause: source,
        }
    }
}

fn sweep_name(cfg: &RunConfig) -> &str {
    cfg.sweep.as_ref().map_or("point", |s| s.parameter.as_str())
}

fn points(cfg: &RunConfig) -> Result<Vec<Point>, CliError> {
    let configs = match &cfg.sweep {
        None => vec![(0.0, "at the configured point".to_string(), cfg.clone())],
        Some(sweep) => grid(sweep)?
            .into_iter()
            .map(|x| {
                Ok((
                    x,
                    format!("at {} = {}", sweep.parameter, exact(x)),
                    cfg.with_parameter(&sweep.parameter, x)?,
                ))
            })
            .collect::<Result<_, CliError>>()?,
    };
    configs
        .into_iter()
        .map(|(x, label, c)| {
            let wrap = |e: CliError| match e {
                CliError::Invalid { field, reason } => CliError::Invalid {
                    field,
                    reason: format!("{reason} ({label})"),
                },
                other => other,
            };
            Ok(Point {
                x,
                scenario: c.scenario.build(),
                model: c.propagation.build().map_err(wrap)?,
                traffic: c.traffic.build().map_err(wrap)?,
                duty_mode: c.traffic.duty_mode(),
                label,
            })
        })
        .collect()
}

fn analytic_header(a: Analysis) -> &'static [&'static str] {
    match a {
        Analysis::Connectivity => &["p_T", "p_S", "p_A", "mu_A", "throughput_analytic"],
        Analysis::Sinr => &["p_T", "p_S", "success_prob", "gamma", "throughput_analytic"],
        Analysis::Both => &[
            "p_T",
            "p_S",
            "p_A",
            "mu_A",
            "throughput_connectivity",
            "success_prob",
            "gamma",
            "throughput_sinr",
        ],
        Analysis::Audible => &["mu_A", "normalized_mu_A"],
    }
}

fn sim_header(a: Analysis) -> &'static [&'static str] {
    match a {
        Analysis::Connectivity | Analysis::Sinr => &["throughput_sim", "stderr", "trials"],
        Analysis::Both => &[
            "throughput_sim_connectivity",
            "stderr_connectivity",
            "throughput_sim_sinr",
            "stderr_sinr",
            "trials",
        ],
        Analysis::Audible => &["mu_A_sim", "stderr", "trials"],
    }
}

/// The single analyses a configuration is made of.
fn parts(a: Analysis) -> &'static [Analysis] {
    match a {
        Analysis::Both => &[Analysis::Connectivity, Analysis::Sinr],
        Analysis::Connectivity => &[Analysis::Connectivity],
        Analysis::Sinr => &[Analysis::Sinr],
        Analysis::Audible => &[Analysis::Audible],
    }
}

/// Analytic columns of one point.
fn analytic(p: &Point, a: Analysis, opts: &RunOptions) -> Result<Vec<f64>, CliError> {
    let sinr_opts = SinrOptions {
        duty_mode: p.duty_mode,
        ..SinrOptions::default()
    };
    Ok(match a {
        Analysis::Connectivity => {
            let r = connectivity_throughput(&p.scenario, &p.model, &p.traffic)
                .map_err(|e| p.fail(e))?;
            vec![r.p_t, r.p_s, r.p_a, r.mu_a, r.throughput]
        }
        Analysis::Sinr => {
            let r =
                sinr_throughput_with(&p.scenario, &p.model, &p.traffic, opts.strategy, &sinr_opts)
                    .map_err(|e| p.fail(e))?;
            vec![r.p_t, r.p_s, r.success_prob, r.gamma, r.throughput]
        }
        Analysis::Both => {
            let mut c = analytic(p, Analysis::Connectivity, opts)?;
            let s = analytic(p, Analysis::Sinr, opts)?;
            c.extend_from_slice(&s[2..]);
            c
        }
        Analysis::Audible => {
            let mu = mean_audible_nodes(&p.scenario, &p.model).map_err(|e| p.fail(e))?;
            let norm = normalized_audible_nodes(&p.model, p.scenario.b).map_err(|e| p.fail(e))?;
            vec![mu, norm]
        }
    })
}

fn headline(a: Analysis, values: &[f64]) -> Vec<f64> {
    match a {
        Analysis::Both => vec![values[4], values[7]],
        Analysis::Audible => vec![values[0]],
        _ => vec![values[4]],
    }
}

fn simulate_part(p: &Point, a: Analysis, cfg: &SimConfig) -> Result<SimEstimate, CliError> {
    let r = match a {
        Analysis::Connectivity => {
            simulate_connectivity_throughput(&p.scenario, &p.model, &p.traffic, cfg)
        }
        Analysis::Sinr => simulate_sinr_throughput(&p.scenario, &p.model, &p.traffic, cfg),
        Analysis::Audible => simulate_audible_count(&p.scenario, &p.model, cfg),
        Analysis::Both => unreachable!("split into parts"),
    };
    r.map_err(|e| p.fail(e))
}

fn simulate_point(p: &Point, a: Analysis, cfg: &SimConfig) -> Result<Vec<SimEstimate>, CliError> {
    parts(a)
        .iter()
        .map(|&part| simulate_part(p, part, cfg))
        .collect()
}

fn sim_columns(estimates: &[SimEstimate]) -> Vec<String> {
    let mut out: Vec<String> = estimates
        .iter()
        .flat_map(|e| [sig9(e.mean), sig9(e.stderr)])
        .collect();
    out.push(estimates[0].trials.to_string());
    out
}

/// Seed of the i-th sweep point.
fn point_config(base: &SimConfig, i: usize) -> SimConfig {
    SimConfig {
        master_seed: base.master_seed.wrapping_add(i as u64),
        ..*base
    }
}

/// Analytic table, with simulation columns when `opts.sim` is set.
pub fn compute(cfg: &RunConfig, opts: &RunOptions) -> Result<Table, CliError> {
    let pts = points(cfg)?;
    let mut header = vec![sweep_name(cfg).to_string()];
    header.extend(analytic_header(cfg.analysis).iter().map(|s| s.to_string()));
    if opts.sim.is_some() {
        header.extend(sim_header(cfg.analysis).iter().map(|s| s.to_string()));
    }
    let mut rows = Vec::with_capacity(pts.len());
    for (i, p) in pts.iter().enumerate() {
        let mut row = vec![exact(p.x)];
        row.extend(analytic(p, cfg.analysis, opts)?.into_iter().map(sig9));
        if let Some(sim) = &opts.sim {
            row.extend(sim_columns(&simulate_point(
                p,
                cfg.analysis,
                &point_config(sim, i),
            )?));
        }
        rows.push(row);
    }
    Ok(Table { header, rows })
}

/// Monte Carlo table only.
pub fn simulate(cfg: &RunConfig, opts: &RunOptions) -> Result<Table, CliError> {
    let sim = opts.sim.unwrap_or_default();
    let pts = points(cfg)?;
    let mut header = vec![sweep_name(cfg).to_string()];
    header.extend(sim_header(cfg.analysis).iter().map(|s| s.to_string()));
    let mut rows = Vec::with_capacity(pts.len());
    for (i, p) in pts.iter().enumerate() {
        let mut row = vec![exact(p.x)];
        row.extend(sim_columns(&simulate_point(
            p,
            cfg.analysis,
            &point_config(&sim, i),
        )?));
        rows.push(row);
    }
    Ok(Table { header, rows })
}

/// One analytic-versus-simulation comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub point: String,
    pub analysis: Analysis,
    pub analytic: f64,
    pub estimate: SimEstimate,
    pub z: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub checks: Vec<Check>,
    pub pass: bool,
}

impl Report {
    pub fn render(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let trunc = match c.estimate.truncation {
                Truncation::Fixed => "fixed".to_string(),
                Truncation::Converged { doublings } => format!("converged({doublings})"),
                Truncation::NotConverged => "not-converged".to_string(),
            };
            out.push_str(&format!(
                "{} {} analytic={} simulated={} stderr={} z={:+.3} trials={} r_max={} truncation={} {}\n",
                c.point,
                c.analysis.name(),
                sig9(c.analytic),
                sig9(c.estimate.mean),
                sig9(c.estimate.stderr),
                c.z,
                c.estimate.trials,
                sig9(c.estimate.r_max),
                trunc,
                if c.pass { "PASS" } else { "FAIL" },
            ));
        }
        let worst = self.checks.iter().map(|c| c.z.abs()).fold(0.0, f64::max);
        out.push_str(&format!(
            "overall {}: {} checks, max |z| = {:.3}\n",
            if self.pass { "PASS" } else { "FAIL" },
            self.checks.len(),
            worst
        ));
        out
    }
}

/// (analytic − simulated)/stderr.
///
/// Throughput trials are 0/1, so when the sample shows no spread the spread
/// implied by the analytic value is used; equal values give exactly 0.
pub fn z_score(analysis: Analysis, analytic: f64, est: &SimEstimate) -> f64 {
    let diff = analytic - est.mean;
    if diff == 0.0 {
        return 0.0;
    }
    let mut se = est.stderr;
    if se == 0.0 && analysis != Analysis::Audible && (0.0..=1.0).contains(&analytic) {
        se = (analytic * (1.0 - analytic) / est.trials as f64).sqrt();
    }
    if se == 0.0 {
        return diff.signum() * f64::INFINITY;
    }
    diff / se
}

/// Runs both paths and scores every point.
pub fn validate(cfg: &RunConfig, opts: &RunOptions) -> Result<Report, CliError> {
    let sim = opts
        .sim
        .ok_or_else(|| CliError::invalid("sim", "validate needs a `sim` section or --trials"))?;
    let pts = points(cfg)?;
    let mut checks = Vec::new();
    for (i, p) in pts.iter().enumerate() {
        let values = analytic(p, cfg.analysis, opts)?;
        let estimates = simulate_point(p, cfg.analysis, &point_config(&sim, i))?;
        let name = match &cfg.sweep {
            Some(s) => format!("{}={}", s.parameter, exact(p.x)),
            None => "point".to_string(),
        };
        for ((&part, value), est) in parts(cfg.analysis)
            .iter()
            .zip(headline(cfg.analysis, &values))
            .zip(estimates)
        {
            let analytic = value + opts.perturb_analytic;
            let z = z_score(part, analytic, &est);
            let pass = z.abs() <= Z_LIMIT && est.truncation != Truncation::NotConverged;
            checks.push(Check {
                point: name.clone(),
                analysis: part,
                analytic,
                estimate: est,
                z,
                pass,
            });
        }
    }
    let pass = checks.iter().all(|c| c.pass);
    Ok(Report { checks, pass })
}
