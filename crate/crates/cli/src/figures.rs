//! Preset configurations for the published figures.
//!
//! Axis ranges are not stated with the figures, so each preset uses the
//! range documented next to it.

use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::error::CliError;

pub const FIGURES: [u8; 6] = [4, 6, 7, 8, 9, 10];

fn channels() -> Vec<(&'static str, Value)> {
    vec![
        ("path_loss", json!({ "model": "path_loss" })),
        (
            "shadowing",
            json!({ "model": "shadowing", "sigma_db": 10.0 }),
        ),
        ("rayleigh", json!({ "model": "rayleigh" })),
        (
            "shadowing_rayleigh",
            json!({ "model": "shadowing_rayleigh", "sigma_db": 10.0 }),
        ),
    ]
}

fn traffics(q_stop_exponential: f64) -> Vec<(&'static str, Value, f64)> {
    vec![
        ("sync", json!({ "kind": "sync", "q": 0.0 }), 1.0),
        ("async", json!({ "kind": "async", "q": 0.0 }), 1.0),
        // Exponential traffic reaches transmit probability 1 only at infinite load.
        (
            "exponential",
            json!({ "kind": "exponential", "q": 0.0 }),
            q_stop_exponential,
        ),
    ]
}

fn config(
    scenario: Value,
    propagation: Value,
    traffic: Value,
    analysis: &str,
    sweep: Value,
) -> Result<RunConfig, CliError> {
    let doc = json!({
        "scenario": scenario,
        "propagation": propagation,
        "traffic": traffic,
        "analysis": analysis,
        "sweep": sweep,
    });
    RunConfig::from_json(&doc.to_string())
}

/// Labelled configurations whose tables, stacked, form the figure's data.
pub fn preset(figure: u8) -> Result<Vec<(String, RunConfig)>, CliError> {
    let connectivity =
        json!({ "lambda": 1.0, "b": 2.0, "p0": 10.0, "p1": 10.0, "r0": 1.0, "p_star": 1.0 });
    let sinr = json!({ "lambda": 1.0, "b": 2.0, "p0": 10.0, "p1": 10.0, "r0": 1.0, "theta_star": 1.0, "noise": 1.0 });
    let both = json!({
        "lambda": 1.0, "b": 2.0, "p0": 10.0, "p1": 10.0, "r0": 1.0,
        "p_star": 1.0, "theta_star": 1.0, "noise": 1.0
    });
    let sync = json!({ "kind": "sync", "q": 0.5 });
    let rayleigh = json!({ "model": "rayleigh" });
    let lambda_sweep = json!({ "parameter": "lambda", "start": 0.0, "stop": 2.0, "step": 0.05 });
    let mut out = Vec::new();
    match figure {
        // Normalized mean audible count against b, 1 ≤ b ≤ 5.
        4 => {
            let sweep = json!({ "parameter": "b", "start": 1.0, "stop": 5.0, "step": 0.1 });
            for (name, ch) in channels() {
                out.push((
                    name.into(),
                    config(
                        connectivity.clone(),
                        ch,
                        sync.clone(),
                        "audible",
                        sweep.clone(),
                    )?,
                ));
            }
        }
        // Throughput against q for the three traffic types, 0 ≤ q ≤ 1.
        6 | 8 => {
            let (scenario, analysis) = if figure == 6 {
                (&connectivity, "connectivity")
            } else {
                (&sinr, "sinr")
            };
            for (name, traffic, stop) in traffics(0.95) {
                let sweep = json!({ "parameter": "q", "start": 0.0, "stop": stop, "step": 0.05 });
                out.push((
                    name.into(),
                    config(scenario.clone(), rayleigh.clone(), traffic, analysis, sweep)?,
                ));
            }
        }
        // Connectivity throughput against P/P*, 0.1 ≤ P/P* ≤ 1000 at 10 points per decade.
        7 => {
            let values: Vec<f64> = (-10..=30).map(|k| 10f64.powf(k as f64 / 10.0)).collect();
            let sweep = json!({ "parameter": "p", "values": values });
            for (name, ch) in channels() {
                out.push((
                    name.into(),
                    config(
                        connectivity.clone(),
                        ch,
                        sync.clone(),
                        "connectivity",
                        sweep.clone(),
                    )?,
                ));
            }
        }
        // SINR throughput against λ, 0 ≤ λ ≤ 2.
        9 => {
            for (name, ch) in channels() {
                out.push((
                    name.into(),
                    config(sinr.clone(), ch, sync.clone(), "sinr", lambda_sweep.clone())?,
                ));
            }
        }
        // Both analyses against λ with P* = N.
        10 => {
            for (name, ch) in [
                ("path_loss", json!({ "model": "path_loss" })),
                ("rayleigh", rayleigh.clone()),
            ] {
                out.push((
                    name.into(),
                    config(both.clone(), ch, sync.clone(), "both", lambda_sweep.clone())?,
                ));
            }
        }
        other => {
            return Err(CliError::invalid(
                "figure",
                format!("no preset for figure {other}; available: {FIGURES:?}"),
            ))
        }
    }
    Ok(out)
}
