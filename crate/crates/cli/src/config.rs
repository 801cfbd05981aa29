//! JSON run configuration.

use std::fmt;
use std::path::PathBuf;

use serde::de::{self, Deserializer};
use serde::Deserialize;
use throughput_core::model::{
    sigma_from_db, DutyMomentMode, PropagationModel, Scenario, TrafficModel,
};
use throughput_core::sim::{RMax, SimConfig};

use crate::error::CliError;

/// A linear power or ratio. Strings of the form `"10dB"` are converted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Level(pub f64);

impl Level {
    pub fn parse(text: &str) -> Result<f64, String> {
        let t = text.trim();
        let (number, db) = match t.strip_suffix("dB").or_else(|| t.strip_suffix("db")) {
            Some(n) => (n.trim(), true),
            None => (t, false),
        };
        let x: f64 = number.parse().map_err(|_| {
            format!("expected a linear number or a decibel string such as \"10dB\", got {text:?}")
        })?;
        Ok(if db { 10f64.powf(x / 10.0) } else { x })
    }
}

impl<'de> Deserialize<'de> for Level {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct Visitor;
        impl de::Visitor<'_> for Visitor {
            type Value = Level;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a number or a decibel string such as \"10dB\"")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Level, E> {
                Ok(Level(v))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Level, E> {
                Ok(Level(v as f64))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Level, E> {
                Ok(Level(v as f64))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<Level, E> {
                Level::parse(v).map(Level).map_err(E::custom)
            }
        }
        d.deserialize_any(Visitor)
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub lambda: f64,
    pub b: f64,
    pub p0: Level,
    pub p1: Level,
    pub r0: f64,
    #[serde(default)]
    pub p_star: Option<Level>,
    #[serde(default)]
    pub theta_star: Option<Level>,
    #[serde(default)]
    pub noise: Option<Level>,
}

impl ScenarioSpec {
    pub fn build(&self) -> Scenario<f64> {
        Scenario {
            lambda: self.lambda,
            b: self.b,
            p0: self.p0.0,
            p1: self.p1.0,
            r0: self.r0,
            p_star: self.p_star.map(|l| l.0),
            theta_star: self.theta_star.map(|l| l.0),
            noise: self.noise.map(|l| l.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelKind {
    PathLoss,
    Shadowing,
    Nakagami,
    Rayleigh,
    ShadowingNakagami,
    ShadowingRayleigh,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PropagationSpec {
    pub model: ChannelKind,
    #[serde(default)]
    pub sigma: Option<f64>,
    #[serde(default)]
    pub sigma_db: Option<f64>,
    #[serde(default)]
    pub m: Option<f64>,
}

impl PropagationSpec {
    pub fn build(&self) -> Result<PropagationModel<f64>, CliError> {
        use ChannelKind::*;
        let shadowed = matches!(
            self.model,
            Shadowing | ShadowingNakagami | ShadowingRayleigh
        );
        let faded = matches!(self.model, Nakagami | ShadowingNakagami);
        let sigma = match (self.sigma, self.sigma_db) {
            (Some(_), Some(_)) => {
                return Err(CliError::invalid(
                    "propagation",
                    "give exactly one of `sigma` and `sigma_db`",
                ))
            }
            (Some(s), None) => Some(s),
            (None, Some(db)) => {
                Some(sigma_from_db(db).map_err(|e| CliError::invalid("propagation.sigma_db", e))?)
            }
            (None, None) => None,
        };
        let sigma = match (shadowed, sigma) {
            (true, Some(s)) => s,
            (true, None) => {
                return Err(CliError::invalid(
                    "propagation",
                    "shadowing needs one of `sigma` and `sigma_db`",
                ))
            }
            (false, Some(_)) => {
                return Err(CliError::invalid(
                    "propagation",
                    "`sigma` applies only to shadowed models",
                ))
            }
            (false, None) => 0.0,
        };
        let m = match (faded, self.m) {
            (true, Some(m)) => m,
            (true, None) => {
                return Err(CliError::invalid(
                    "propagation.m",
                    "Nakagami fading needs `m`",
                ))
            }
            (false, Some(_)) => {
                return Err(CliError::invalid(
                    "propagation.m",
                    "`m` applies only to Nakagami models",
                ))
            }
            (false, None) => 1.0,
        };
        let model = match self.model {
            PathLoss => PropagationModel::PathLossOnly,
            Shadowing => PropagationModel::LogNormalShadowing { sigma },
            Nakagami | Rayleigh => PropagationModel::NakagamiFading { m },
            ShadowingNakagami | ShadowingRayleigh => {
                PropagationModel::ShadowingAndNakagami { sigma, m }
            }
        };
        model
            .validate()
            .map_err(|e| CliError::invalid("propagation", e))?;
        Ok(model)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrafficKind {
    Sync,
    Async,
    Exponential,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DutyMoment {
    #[default]
    Exact,
    Approximate,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrafficSpec {
    pub kind: TrafficKind,
    /// Slot probability, or the transmit probability of exponential traffic.
    #[serde(default)]
    pub q: Option<f64>,
    #[serde(default)]
    pub lambda_p: Option<f64>,
    #[serde(default)]
    pub packet_len: Option<f64>,
    #[serde(default)]
    pub duty_moment: DutyMoment,
}

impl TrafficSpec {
    pub fn build(&self) -> Result<TrafficModel<f64>, CliError> {
        let slotted = |q: Option<f64>| {
            if self.lambda_p.is_some() || self.packet_len.is_some() {
                return Err(CliError::invalid(
                    "traffic",
                    "`lambda_p` and `packet_len` apply only to exponential traffic",
                ));
            }
            q.ok_or_else(|| CliError::invalid("traffic.q", "slotted traffic needs `q`"))
        };
        let model = match self.kind {
            TrafficKind::Sync => TrafficModel::SlottedSync {
                q: slotted(self.q)?,
            },
            TrafficKind::Async => TrafficModel::SlottedAsync {
                q: slotted(self.q)?,
            },
            TrafficKind::Exponential => {
                let len = self.packet_len.unwrap_or(1.0);
                match (self.q, self.lambda_p) {
                    (Some(q), None) => TrafficModel::exponential_with_transmit_prob(q, len)
                        .map_err(|e| CliError::invalid("traffic.q", e))?,
                    (None, Some(lambda_p)) => TrafficModel::ExponentialInterarrivals { lambda_p, packet_len: len },
                    _ => {
                        return Err(CliError::invalid(
                            "traffic",
                            "exponential traffic needs exactly one of `q` (transmit probability) and `lambda_p`",
                        ))
                    }
                }
            }
        };
        model
            .validate()
            .map_err(|e| CliError::invalid("traffic", e))?;
        Ok(model)
    }

    pub fn duty_mode(&self) -> DutyMomentMode {
        match self.duty_moment {
            DutyMoment::Exact => DutyMomentMode::Exact,
            DutyMoment::Approximate => DutyMomentMode::Approximate,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Analysis {
    Connectivity,
    Sinr,
    Both,
    /// Mean number of audible nodes and its normalized form.
    Audible,
}

impl Analysis {
    pub fn name(self) -> &'static str {
        match self {
            Analysis::Connectivity => "connectivity",
            Analysis::Sinr => "sinr",
            Analysis::Both => "both",
            Analysis::Audible => "audible",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub parameter: String,
    #[serde(default)]
    pub start: Option<f64>,
    #[serde(default)]
    pub stop: Option<f64>,
    #[serde(default)]
    pub step: Option<f64>,
    #[serde(default)]
    pub values: Option<Vec<f64>>,
}

/// `"auto"` or a radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RMaxSpec(pub RMax);

impl RMaxSpec {
    pub fn parse(text: &str) -> Result<RMax, String> {
        if text.trim() == "auto" {
            return Ok(RMax::Auto);
        }
        text.trim()
            .parse()
            .map(RMax::Fixed)
            .map_err(|_| format!("expected \"auto\" or a radius, got {text:?}"))
    }
}

impl<'de> Deserialize<'de> for RMaxSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct Visitor;
        impl de::Visitor<'_> for Visitor {
            type Value = RMaxSpec;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("\"auto\" or a radius")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> Result<RMaxSpec, E> {
                Ok(RMaxSpec(RMax::Fixed(v)))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<RMaxSpec, E> {
                Ok(RMaxSpec(RMax::Fixed(v as f64)))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<RMaxSpec, E> {
                Ok(RMaxSpec(RMax::Fixed(v as f64)))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<RMaxSpec, E> {
                RMaxSpec::parse(v).map(RMaxSpec).map_err(E::custom)
            }
        }
        d.deserialize_any(Visitor)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSpec {
    #[serde(default)]
    pub trials: Option<usize>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub r_max: Option<RMaxSpec>,
    #[serde(default)]
    pub target_stderr: Option<f64>,
}

impl SimSpec {
    pub fn build(&self) -> SimConfig {
        let d = SimConfig::default();
        SimConfig {
            trials: self.trials.unwrap_or(d.trials),
            r_max: self.r_max.map_or(d.r_max, |r| r.0),
            master_seed: self.seed.unwrap_or(d.master_seed),
            target_stderr: self.target_stderr,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub scenario: ScenarioSpec,
    pub propagation: PropagationSpec,
    pub traffic: TrafficSpec,
    pub analysis: Analysis,
    #[serde(default)]
    pub sweep: Option<SweepSpec>,
    #[serde(default)]
    pub sim: Option<SimSpec>,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: Self = serde_json::from_str(text).map_err(CliError::Schema)?;
        cfg.check()?;
        Ok(cfg)
    }

    /// Structural checks that do not depend on the swept value.
    pub fn check(&self) -> Result<(), CliError> {
        self.propagation.build()?;
        if let Some(sweep) = &self.sweep {
            crate::sweep::grid(sweep)?;
        } else {
            self.traffic.build()?;
        }
        Ok(())
    }

    /// Sets the named parameter, as a sweep does.
    pub fn with_parameter(&self, name: &str, value: f64) -> Result<Self, CliError> {
        let mut c = self.clone();
        let s = &mut c.scenario;
        match name {
            "lambda" => s.lambda = value,
            "b" => s.b = value,
            "p0" => s.p0 = Level(value),
            "p1" => s.p1 = Level(value),
            "p" => {
                s.p0 = Level(value);
                s.p1 = Level(value);
            }
            "r0" => s.r0 = value,
            "p_star" => s.p_star = Some(Level(value)),
            "theta_star" => s.theta_star = Some(Level(value)),
            "noise" => s.noise = Some(Level(value)),
            "sigma" => {
                c.propagation.sigma = Some(value);
                c.propagation.sigma_db = None;
            }
            "sigma_db" => {
                c.propagation.sigma_db = Some(value);
                c.propagation.sigma = None;
            }
            "m" => c.propagation.m = Some(value),
            "q" => {
                c.traffic.q = Some(value);
                c.traffic.lambda_p = None;
            }
            "lambda_p" => {
                c.traffic.lambda_p = Some(value);
                c.traffic.q = None;
            }
            "packet_len" => c.traffic.packet_len = Some(value),
            other => {
                return Err(CliError::invalid(
                    "sweep.parameter",
                    format!(
                        "unknown parameter `{other}`; expected one of {}",
                        SWEEPABLE.join(", ")
                    ),
                ))
            }
        }
        Ok(c)
    }
}

/// Names accepted by `sweep.parameter`. `p` sets p0 and p1 together.
pub const SWEEPABLE: [&str; 15] = [
    "lambda",
    "b",
    "p0",
    "p1",
    "p",
    "r0",
    "p_star",
    "theta_star",
    "noise",
    "sigma",
    "sigma_db",
    "m",
    "q",
    "lambda_p",
    "packet_len",
];
