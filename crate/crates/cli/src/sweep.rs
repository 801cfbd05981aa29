//! Sweep grids in exact decimal steps.

use crate::config::{SweepSpec, SWEEPABLE};
use crate::error::CliError;

/// Grid points are capped to keep a typo from launching a huge run.
pub const MAX_SWEEP_POINTS: usize = 100_000;

/// Digits after the decimal point in the shortest representation of `x`.
fn decimals(x: f64) -> usize {
    let s = format!("{x:e}");
    let (mantissa, exp) = s.split_once('e').unwrap_or((&s, "0"));
    let frac = mantissa.split_once('.').map_or(0, |(_, f)| f.len()) as i64;
    let exp: i64 = exp.parse().unwrap_or(0);
    (frac - exp).max(0) as usize
}

/// `n / 10^d`, rounded once to the nearest double.
fn from_scaled(n: i128, d: usize) -> f64 {
    format!("{n}e-{d}")
        .parse()
        .expect("integer mantissa parses")
}

/// Expands a sweep into its points.
pub fn grid(spec: &SweepSpec) -> Result<Vec<f64>, CliError> {
    if !SWEEPABLE.contains(&spec.parameter.as_str()) {
        return Err(CliError::invalid(
            "sweep.parameter",
            format!(
                "unknown parameter `{}`; expected one of {}",
                spec.parameter,
                SWEEPABLE.join(", ")
            ),
        ));
    }
    let points = match (&spec.values, spec.start, spec.stop, spec.step) {
        (Some(values), None, None, None) => {
            if values.is_empty() {
                return Err(CliError::invalid("sweep.values", "must not be empty"));
            }
            values.clone()
        }
        (None, Some(start), Some(stop), Some(step)) => range(start, stop, step)?,
        _ => {
            return Err(CliError::invalid(
                "sweep",
                "give either `values` or all of `start`, `stop` and `step`",
            ))
        }
    };
    if let Some(bad) = points.iter().find(|x| !x.is_finite()) {
        return Err(CliError::invalid(
            "sweep",
            format!("values must be finite, got {bad}"),
        ));
    }
    Ok(points)
}

fn range(start: f64, stop: f64, step: f64) -> Result<Vec<f64>, CliError> {
    if !(step > 0.0) || !step.is_finite() {
        return Err(CliError::invalid(
            "sweep.step",
            format!("must be positive, got {step}"),
        ));
    }
    if !(start <= stop) || !start.is_finite() || !stop.is_finite() {
        return Err(CliError::invalid(
            "sweep",
            format!("need start <= stop, got {start} and {stop}"),
        ));
    }
    let d = decimals(start).max(decimals(step)).max(decimals(stop));
    if d > 15 {
        return Err(CliError::invalid(
            "sweep",
            "start, stop and step need at most 15 decimal places",
        ));
    }
    let scale = 10f64.powi(d as i32);
    let to_int = |x: f64| (x * scale).round() as i128;
    let (a, b, h) = (to_int(start), to_int(stop), to_int(step));
    let count = (b - a) / h + 1;
    if count as usize > MAX_SWEEP_POINTS {
        return Err(CliError::invalid(
            "sweep",
            format!("{count} points exceed the limit of {MAX_SWEEP_POINTS}"),
        ));
    }
    Ok((0..count).map(|i| from_scaled(a + i * h, d)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(start: f64, stop: f64, step: f64) -> SweepSpec {
        SweepSpec {
            parameter: "q".into(),
            start: Some(start),
            stop: Some(stop),
            step: Some(step),
            values: None,
        }
    }

    #[test]
    fn decimal_steps_do_not_drift() {
        let g = grid(&spec(0.0, 1.0, 0.1)).unwrap();
        assert_eq!(g.len(), 11);
        assert_eq!(g[3], 0.3);
        assert_eq!(g[7], 0.7);
        assert_eq!(g[10], 1.0);
        let g = grid(&spec(1.05, 2.0, 0.05)).unwrap();
        assert_eq!(g.len(), 20);
        assert_eq!(g[19], 2.0);
        assert_eq!(
            grid(&spec(100.0, 300.0, 50.0)).unwrap(),
            vec![100.0, 150.0, 200.0, 250.0, 300.0]
        );
    }

    #[test]
    fn stop_is_not_overshot() {
        assert_eq!(
            grid(&spec(0.0, 1.0, 0.3)).unwrap(),
            vec![0.0, 0.3, 0.6, 0.9]
        );
        assert_eq!(grid(&spec(2.0, 2.0, 1.0)).unwrap(), vec![2.0]);
    }

    #[test]
    fn bad_ranges() {
        assert!(grid(&spec(1.0, 0.0, 0.1)).is_err());
        assert!(grid(&spec(0.0, 1.0, 0.0)).is_err());
        assert!(grid(&spec(0.0, 1.0, -0.1)).is_err());
        let unknown = SweepSpec {
            parameter: "lamda".into(),
            ..spec(0.0, 1.0, 0.1)
        };
        assert!(grid(&unknown).unwrap_err().to_string().contains("lamda"));
    }
}
